//! Direct scattering by rigid obstacles: a method-of-fundamental-solutions
//! solver and a modal series solution for a centered disk.

use std::f64::consts::TAU;

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::elastic_kernels::{navier_green, point_source};
use crate::error::{Error, Result};
use crate::linalg2::{CVec2, Mat2};
use crate::medium_geometry::{norm, ElasticMedium, ParametricBoundary, Point, Scene};
use crate::oti::{a_n_matrix, rotation_m, MAX_MODAL_CONDITION};
use crate::specfun::hankel1_with_deriv_all;

/// Incident field evaluated at a boundary point.
pub type Incident<'a> = dyn Fn(Point) -> Result<CVec2> + 'a;

/// Placement of fictitious sources inside each obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Retraction {
    /// `s(t) = x(t) - f * min(1/|kappa(t)|, cap) * n(t)` along the inward normal.
    NormalOffset { fraction: f64 },
    /// `s(t) = c + f * (x(t) - c)` toward the boundary center.
    CenterScaling { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfsOptions {
    pub retraction: Retraction,
    /// Lower bound on sources per obstacle.
    pub min_sources: usize,
    /// Fixed source count per obstacle; `None` adapts it to the geometry.
    pub sources: Option<usize>,
    /// Collocation points per source.
    pub collocation_ratio: usize,
    /// Relative singular-value cutoff of the least-squares solve.
    pub svd_cutoff: f64,
    /// Largest accepted relative boundary residual.
    pub tolerance: f64,
}

impl Default for MfsOptions {
    fn default() -> Self {
        Self {
            retraction: Retraction::NormalOffset { fraction: 0.35 },
            min_sources: 256,
            sources: None,
            collocation_ratio: 2,
            svd_cutoff: 1e-12,
            tolerance: 1e-4,
        }
    }
}

/// Source curve and source count for one obstacle.
fn source_layout(
    ob: &ParametricBoundary,
    clearance: f64,
    options: &MfsOptions,
) -> Result<(Vec<Point>, usize)> {
    let cap = (0.25 * ob.diameter_estimate()).min(clearance);
    let (retract, spacing_scale): (Box<dyn Fn(f64) -> Point>, f64) = match options.retraction {
        Retraction::NormalOffset { fraction } => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "normal offset fraction must lie in (0, 1), got {fraction}"
                )));
            }
            let ob = *ob;
            (
                Box::new(move |t| {
                    let p = ob.position(t);
                    let n = ob.normal(t);
                    let k = ob.curvature(t).abs().max(1e-12);
                    let off = fraction * (1.0 / k).min(cap);
                    [p[0] - off * n[0], p[1] - off * n[1]]
                }),
                fraction * cap,
            )
        }
        Retraction::CenterScaling { factor } => {
            if !(factor > 0.0 && factor < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "center scaling factor must lie in (0, 1), got {factor}"
                )));
            }
            let ob = *ob;
            let c = ob.center();
            (
                Box::new(move |t| {
                    let p = ob.position(t);
                    [c[0] + factor * (p[0] - c[0]), c[1] + factor * (p[1] - c[1])]
                }),
                (1.0 - factor) * 0.5 * ob.diameter_estimate(),
            )
        }
    };
    let n = match options.sources {
        Some(n) => n,
        None => {
            // keep the source spacing below the distance to the boundary
            let needed = (ob.perimeter() / (0.6 * spacing_scale)).ceil() as usize;
            needed.max(options.min_sources).div_ceil(64) * 64
        }
    };
    if n == 0 {
        return Err(Error::InvalidParameter("MFS needs at least one source".into()));
    }
    let pts = (0..n).map(|k| retract(TAU * k as f64 / n as f64)).collect();
    Ok((pts, n))
}

/// Stacked Green matrix with block `(p, q) = Pi(targets[p], sources[q])`.
pub fn green_matrix(medium: &ElasticMedium, targets: &[Point], sources: &[Point]) -> Result<Mat<c64>> {
    let mut g = Mat::<c64>::zeros(2 * targets.len(), 2 * sources.len());
    for (p, x) in targets.iter().enumerate() {
        for (q, y) in sources.iter().enumerate() {
            let b = navier_green(medium, *x, *y)?;
            for a in 0..2 {
                for c in 0..2 {
                    g[(2 * p + a, 2 * q + c)] = b.get(a, c);
                }
            }
        }
    }
    Ok(g)
}

fn stack_incident(points: &[Point], field: &Incident<'_>) -> Result<Vec<c64>> {
    let mut out = Vec::with_capacity(2 * points.len());
    for p in points {
        let v = field(*p)?;
        out.extend_from_slice(&v);
    }
    Ok(out)
}

/// Factorized MFS system for a fixed scene; reused for every incident field.
pub struct MfsSolver {
    medium: ElasticMedium,
    obstacles: Vec<ParametricBoundary>,
    sources: Vec<Point>,
    collocation: Vec<Point>,
    validation: Vec<Point>,
    // truncated pseudo-inverse factors: coef = v * diag(s_inv) * u^H * rhs
    u: Mat<c64>,
    s_inv: Vec<f64>,
    v: Mat<c64>,
    validation_green: Mat<c64>,
    options: MfsOptions,
}

impl std::fmt::Debug for MfsSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfsSolver")
            .field("sources", &self.sources.len())
            .field("collocation", &self.collocation.len())
            .field("rank", &self.s_inv.len())
            .finish()
    }
}

/// Coefficients and residuals for a batch of incident fields.
#[derive(Debug, Clone)]
pub struct MfsBatch {
    /// Column `k` holds the stacked source strengths for field `k`.
    pub coefficients: Mat<c64>,
    /// Relative boundary misfit per field on the validation points.
    pub residuals: Vec<f64>,
}

/// Scattered field represented by fictitious point sources.
#[derive(Debug, Clone)]
pub struct ScatterSolution {
    medium: ElasticMedium,
    obstacles: Vec<ParametricBoundary>,
    sources: Vec<Point>,
    coefficients: Vec<CVec2>,
    residual: f64,
}

impl ScatterSolution {
    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    pub fn coefficients(&self) -> &[CVec2] {
        &self.coefficients
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

impl MfsSolver {
    /// Builds and factorizes the collocation system for all obstacles at once.
    /// `clearance_radius` is the measurement radius, used to refine the
    /// discretization for obstacles close to the sources.
    pub fn new(
        medium: &ElasticMedium,
        obstacles: &[ParametricBoundary],
        clearance_radius: f64,
        options: MfsOptions,
    ) -> Result<Self> {
        if options.collocation_ratio == 0 || !(options.svd_cutoff > 0.0) || !(options.tolerance > 0.0) {
            return Err(Error::InvalidParameter("invalid MFS options".into()));
        }
        let mut sources = Vec::new();
        let mut collocation = Vec::new();
        let mut validation = Vec::new();
        for ob in obstacles {
            let clearance = clearance_radius - ob.max_norm();
            if !(clearance > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "obstacle {} is not inside radius {clearance_radius}",
                    ob.shape()
                )));
            }
            let (pts, n) = source_layout(ob, clearance, &options)?;
            let ncol = options.collocation_ratio * n;
            sources.extend(pts);
            collocation.extend(ob.samples(ncol, 0.0));
            validation.extend(ob.samples(ncol, 0.5));
        }
        let (u, s_inv, v, validation_green) = if sources.is_empty() {
            (Mat::zeros(0, 0), Vec::new(), Mat::zeros(0, 0), Mat::zeros(0, 0))
        } else {
            let a = green_matrix(medium, &collocation, &sources)?;
            let svd = a
                .thin_svd()
                .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
            let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
            let smax = s.first().copied().unwrap_or(0.0);
            let keep = s.iter().take_while(|&&x| x > options.svd_cutoff * smax).count();
            let u = svd.U().subcols(0, keep).to_owned();
            let v = svd.V().subcols(0, keep).to_owned();
            let s_inv = s[..keep].iter().map(|x| 1.0 / x).collect();
            let vg = green_matrix(medium, &validation, &sources)?;
            (u, s_inv, v, vg)
        };
        Ok(Self {
            medium: *medium,
            obstacles: obstacles.to_vec(),
            sources,
            collocation,
            validation,
            u,
            s_inv,
            v,
            validation_green,
            options,
        })
    }

    pub fn for_scene(scene: &Scene, options: MfsOptions) -> Result<Self> {
        Self::new(scene.medium(), scene.obstacles(), scene.circle().radius(), options)
    }

    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    pub fn collocation_points(&self) -> &[Point] {
        &self.collocation
    }

    pub fn options(&self) -> &MfsOptions {
        &self.options
    }

    /// Solves for every field; fails on the first residual above tolerance.
    pub fn solve_batch(&self, fields: &[&Incident<'_>]) -> Result<MfsBatch> {
        let batch = self.solve_batch_unchecked(fields)?;
        for (k, &r) in batch.residuals.iter().enumerate() {
            if !(r <= self.options.tolerance) {
                return Err(Error::SolverResidual {
                    residual: r,
                    tolerance: self.options.tolerance,
                    source_index: k,
                });
            }
        }
        Ok(batch)
    }

    /// Solves for every field and reports residuals without enforcing them.
    pub fn solve_batch_unchecked(&self, fields: &[&Incident<'_>]) -> Result<MfsBatch> {
        let nf = fields.len();
        if self.sources.is_empty() {
            return Ok(MfsBatch { coefficients: Mat::zeros(0, nf), residuals: vec![0.0; nf] });
        }
        let nc = 2 * self.collocation.len();
        let nv = 2 * self.validation.len();
        let mut rhs = Mat::<c64>::zeros(nc, nf);
        let mut val = Mat::<c64>::zeros(nv, nf);
        for (k, f) in fields.iter().enumerate() {
            for (i, z) in stack_incident(&self.collocation, f)?.into_iter().enumerate() {
                rhs[(i, k)] = -z;
            }
            for (i, z) in stack_incident(&self.validation, f)?.into_iter().enumerate() {
                val[(i, k)] = z;
            }
        }
        let mut w = self.u.adjoint() * &rhs;
        for (i, s) in self.s_inv.iter().enumerate() {
            for k in 0..nf {
                w[(i, k)] *= *s;
            }
        }
        let coefficients = &self.v * &w;
        let misfit = &self.validation_green * &coefficients + &val;
        let residuals = (0..nf)
            .map(|k| {
                let num: f64 = (0..nv).map(|i| misfit[(i, k)].norm_sqr()).sum();
                let den: f64 = (0..nv).map(|i| val[(i, k)].norm_sqr()).sum();
                if den == 0.0 { num.sqrt() } else { (num / den).sqrt() }
            })
            .collect();
        Ok(MfsBatch { coefficients, residuals })
    }

    /// Single incident field.
    pub fn solve(&self, field: &Incident<'_>) -> Result<ScatterSolution> {
        let batch = self.solve_batch(&[field])?;
        Ok(self.solution_from(&batch, 0))
    }

    /// Extracts column `k` of a batch as a standalone solution.
    pub fn solution_from(&self, batch: &MfsBatch, k: usize) -> ScatterSolution {
        let coefficients = (0..self.sources.len())
            .map(|q| [batch.coefficients[(2 * q, k)], batch.coefficients[(2 * q + 1, k)]])
            .collect();
        ScatterSolution {
            medium: self.medium,
            obstacles: self.obstacles.clone(),
            sources: self.sources.clone(),
            coefficients,
            residual: batch.residuals[k],
        }
    }

    /// Stacked scattered fields at `points` for every column of the batch.
    pub fn evaluate_batch(&self, batch: &MfsBatch, points: &[Point]) -> Result<Mat<c64>> {
        check_outside(&self.obstacles, points)?;
        if self.sources.is_empty() {
            return Ok(Mat::zeros(2 * points.len(), batch.coefficients.ncols()));
        }
        Ok(green_matrix(&self.medium, points, &self.sources)? * &batch.coefficients)
    }
}

fn check_outside(obstacles: &[ParametricBoundary], points: &[Point]) -> Result<()> {
    for p in points {
        if obstacles.iter().any(|o| o.contains(*p)) {
            return Err(Error::PointOutOfRange {
                x: p[0],
                y: p[1],
                reason: "lies inside an obstacle",
            });
        }
    }
    Ok(())
}

/// Solves one scattering problem for the scene with default options.
pub fn solve_mfs(scene: &Scene, incident: &Incident<'_>) -> Result<ScatterSolution> {
    MfsSolver::for_scene(scene, MfsOptions::default())?.solve(incident)
}

/// Scattered field of `solution` at each point.
pub fn scatter_at(solution: &ScatterSolution, points: &[Point]) -> Result<Vec<CVec2>> {
    check_outside(&solution.obstacles, points)?;
    points
        .iter()
        .map(|x| {
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for (s, c) in solution.sources.iter().zip(&solution.coefficients) {
                let v = navier_green(&solution.medium, *x, *s)?.mul_vec(*c);
                acc[0] += v[0];
                acc[1] += v[1];
            }
            Ok(acc)
        })
        .collect()
}

/// Incident field of a point source at `y` with polarization `a`.
pub fn point_source_field(medium: ElasticMedium, y: Point, a: Point) -> impl Fn(Point) -> Result<CVec2> {
    move |x| point_source(&medium, x, y, a)
}

/// Modal solution for a rigid disk centered at the origin.
#[derive(Debug, Clone)]
pub struct DiskSeriesSolution {
    medium: ElasticMedium,
    radius: f64,
    n_trunc: usize,
    /// `(alpha_n, beta_n)` for `n = -n_trunc..=n_trunc`.
    coefficients: Vec<CVec2>,
}

impl DiskSeriesSolution {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn coefficient(&self, n: i32) -> Option<CVec2> {
        let k = n + self.n_trunc as i32;
        usize::try_from(k).ok().and_then(|k| self.coefficients.get(k)).copied()
    }

    /// Evaluates `sum_n M(theta)^T A_n(r) c_n e^{i n theta}` at `r >= radius`.
    pub fn evaluate(&self, x: Point) -> Result<CVec2> {
        let r = norm(x);
        if r < self.radius * (1.0 - 1e-12) {
            return Err(Error::PointOutOfRange { x: x[0], y: x[1], reason: "lies inside the disk" });
        }
        let theta = x[1].atan2(x[0]);
        let nt = self.n_trunc;
        let (hp, dp) = hankel1_with_deriv_all(nt, self.medium.kp() * r)?;
        let (hs, ds) = hankel1_with_deriv_all(nt, self.medium.ks() * r)?;
        let (kp, ks) = (self.medium.kp(), self.medium.ks());
        let mut acc = [Complex64::new(0.0, 0.0); 2];
        for n in -(nt as i32)..=(nt as i32) {
            let m = n.unsigned_abs() as usize;
            let sgn = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
            let inr = Complex64::new(0.0, n as f64 / r);
            let a = Mat2::new(kp * sgn * dp[m], -inr * sgn * hs[m], inr * sgn * hp[m], ks * sgn * ds[m]);
            let v = a.mul_vec(self.coefficients[(n + nt as i32) as usize]);
            let e = Complex64::from_polar(1.0, n as f64 * theta);
            acc[0] += v[0] * e;
            acc[1] += v[1] * e;
        }
        let rt = Mat2::from_real(rotation_m(theta)).transpose();
        Ok(rt.mul_vec(acc))
    }
}

/// Fourier coefficients `f_n` of `M(theta) (-u_in)` on the circle of radius `radius`.
fn boundary_modes(radius: f64, n_trunc: usize, incident: &Incident<'_>) -> Result<Vec<CVec2>> {
    let samples = (4 * n_trunc + 4).max(256);
    let data: Vec<CVec2> = (0..samples)
        .map(|l| {
            let th = TAU * l as f64 / samples as f64;
            let u = incident([radius * th.cos(), radius * th.sin()])?;
            let rot = Mat2::from_real(rotation_m(th)).mul_vec(u);
            Ok([-rot[0], -rot[1]])
        })
        .collect::<Result<_>>()?;
    let nt = n_trunc as i32;
    Ok((-nt..=nt)
        .map(|n| {
            let mut f = [Complex64::new(0.0, 0.0); 2];
            for (l, d) in data.iter().enumerate() {
                let e = Complex64::from_polar(1.0, -(n as f64) * TAU * l as f64 / samples as f64);
                f[0] += d[0] * e;
                f[1] += d[1] * e;
            }
            [f[0] / samples as f64, f[1] / samples as f64]
        })
        .collect())
}

/// Modal solution of the rigid-disk problem, one 2x2 solve per order.
pub fn disk_series(
    medium: &ElasticMedium,
    radius: f64,
    incident: &Incident<'_>,
    n_trunc: usize,
) -> Result<DiskSeriesSolution> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("disk radius must be positive, got {radius}")));
    }
    let minimum = (medium.ks() * radius).ceil() as usize + 20;
    if n_trunc < minimum {
        return Err(Error::InvalidParameter(format!(
            "disk series needs at least {minimum} orders, got {n_trunc}"
        )));
    }
    let modes = boundary_modes(radius, n_trunc, incident)?;
    let nt = n_trunc as i32;
    let coefficients = (-nt..=nt)
        .zip(modes)
        .map(|(n, f)| {
            let a = a_n_matrix(medium, n, radius)?;
            let condition = a.equilibrated_condition();
            let (inv, _) = a.inverse_with_condition();
            if !(condition <= MAX_MODAL_CONDITION) {
                return Err(Error::SingularModalMatrix { order: n, condition });
            }
            Ok(inv.mul_vec(f))
        })
        .collect::<Result<_>>()?;
    Ok(DiskSeriesSolution { medium: *medium, radius, n_trunc, coefficients })
}
