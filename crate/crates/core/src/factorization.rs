//! Near-field data, the F-sharp transform, and the Picard-series indicator.

use std::io::{BufRead, Write};

use faer::{c64, Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::elastic_kernels::navier_green;
use crate::error::{Error, Result};
use crate::forward::{point_source_field, Incident, MfsSolver};
use crate::matrix_io;
use crate::medium_geometry::{norm, polarization, ElasticMedium, MeasurementCircle, Point, Scene};
use crate::oti::OtIMatrix;

/// Multiplicative data noise: each entry scaled by `1 + delta r`, `r ~ U[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub delta: f64,
    pub seed: u64,
}

/// Scattered fields on the measurement circle for every source and polarization.
///
/// Row `2 i + k` is component `k` at receiver `x_i`; column `2 j + p` is the
/// source at `y_j` with polarization `e_p` (`e_0 = (1, 0)`, `e_1 = (0, 1)`).
#[derive(Debug, Clone)]
pub struct NearFieldMatrix {
    matrix: Mat<c64>,
    medium: ElasticMedium,
    circle: MeasurementCircle,
    noise: Option<Noise>,
}

impl NearFieldMatrix {
    pub fn new(matrix: Mat<c64>, medium: ElasticMedium, circle: MeasurementCircle) -> Result<Self> {
        let n = 2 * circle.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "near-field matrix is {}x{}, expected {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, medium, circle, noise: None })
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn medium(&self) -> &ElasticMedium {
        &self.medium
    }

    pub fn circle(&self) -> &MeasurementCircle {
        &self.circle
    }

    pub fn noise(&self) -> Option<Noise> {
        self.noise
    }

    /// Block `(i, j)`: columns are the two polarizations of source `j`.
    pub fn block(&self, i: usize, j: usize) -> [[c64; 2]; 2] {
        let m = &self.matrix;
        [
            [m[(2 * i, 2 * j)], m[(2 * i, 2 * j + 1)]],
            [m[(2 * i + 1, 2 * j)], m[(2 * i + 1, 2 * j + 1)]],
        ]
    }

    fn header(&self) -> String {
        let (delta, seed) = self.noise.map_or((0.0, 0), |n| (n.delta, n.seed));
        format!(
            "nfm v1 m2={} R={} lambda={} mu={} omega={} delta={} seed={}",
            self.circle.len(),
            self.circle.radius(),
            self.medium.lambda(),
            self.medium.mu(),
            self.medium.omega(),
            delta,
            seed
        )
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        matrix_io::write_entries(out, Some(&self.header()), self.matrix.as_ref())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let file = matrix_io::read_entries(input)?;
        let meta = file
            .header
            .iter()
            .find(|h| h.starts_with("nfm v1"))
            .ok_or_else(|| Error::Format("missing `# nfm v1` header".into()))?;
        let field = |key: &str| -> Result<&str> {
            meta.split_whitespace()
                .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Format(format!("header lacks `{key}`")))
        };
        let num = |key: &str| -> Result<f64> {
            field(key)?
                .parse()
                .map_err(|_| Error::Format(format!("bad value for `{key}`")))
        };
        let m2: usize = field("m2")?
            .parse()
            .map_err(|_| Error::Format("bad value for `m2`".into()))?;
        let seed: u64 = field("seed")?
            .parse()
            .map_err(|_| Error::Format("bad value for `seed`".into()))?;
        let delta = num("delta")?;
        let medium = ElasticMedium::new(num("lambda")?, num("mu")?, num("omega")?)?;
        let circle = MeasurementCircle::new(num("R")?, m2)?;
        let mut n = Self::new(file.matrix, medium, circle)?;
        if delta != 0.0 || seed != 0 {
            n.noise = Some(Noise { delta, seed });
        }
        Ok(n)
    }
}

/// Near-field matrix of the scene, computed with one combined MFS system.
pub fn assemble_n(scene: &Scene, solver: &MfsSolver) -> Result<NearFieldMatrix> {
    Ok(assemble_n_with_residuals(scene, solver)?.0)
}

/// As [`assemble_n`], also returning the boundary residual of each source
/// (worst of its two polarizations).
pub fn assemble_n_with_residuals(scene: &Scene, solver: &MfsSolver) -> Result<(NearFieldMatrix, Vec<f64>)> {
    let medium = *scene.medium();
    let circle = scene.circle().clone();
    let sources = circle.points();
    let fields: Vec<_> = sources
        .iter()
        .flat_map(|y| [[1.0, 0.0], [0.0, 1.0]].map(|a| point_source_field(medium, *y, a)))
        .collect();
    let refs: Vec<&Incident<'_>> = fields.iter().map(|f| f as &Incident<'_>).collect();
    let batch = solver.solve_batch(&refs).map_err(|e| match e {
        Error::SolverResidual { residual, tolerance, source_index } => Error::SolverResidual {
            residual,
            tolerance,
            source_index: source_index / 2,
        },
        other => other,
    })?;
    let matrix = solver.evaluate_batch(&batch, &sources)?;
    let residuals = batch.residuals.chunks(2).map(|r| r[0].max(r[1])).collect();
    Ok((NearFieldMatrix::new(matrix, medium, circle)?, residuals))
}

/// Applies multiplicative noise entry by entry in row-major order.
pub fn add_noise(n: &NearFieldMatrix, delta: f64, seed: u64) -> Result<NearFieldMatrix> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level must be nonnegative, got {delta}")));
    }
    let mut out = n.clone();
    out.noise = Some(Noise { delta, seed });
    if delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for i in 0..out.matrix.nrows() {
        for j in 0..out.matrix.ncols() {
            let r: f64 = rng.random_range(-1.0..=1.0);
            out.matrix[(i, j)] *= 1.0 + delta * r;
        }
    }
    Ok(out)
}

/// Eigenpairs of a Hermitian matrix sorted by decreasing `|lambda|`.
/// Eigenvectors are orthonormal in the unweighted inner product.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Mat<c64>,
}

impl EigenSystem {
    pub fn new(a: &Mat<c64>) -> Result<Self> {
        let (vals, vecs) = hermitian_eigen(a)?;
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&i, &j| vals[j].abs().total_cmp(&vals[i].abs()));
        let values = order.iter().map(|&i| vals[i]).collect();
        let vectors = Mat::<c64>::from_fn(vecs.nrows(), order.len(), |r, c| vecs[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Mat<c64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenpairs scaled by `c > 0` (eigenvectors unchanged).
    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| c * v).collect(), vectors: self.vectors.clone() }
    }
}

fn hermitian_eigen(a: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Spectral absolute value `V |Lambda| V^H` of a Hermitian matrix.
pub fn hermitian_abs(a: &Mat<c64>) -> Result<Mat<c64>> {
    let (vals, v) = hermitian_eigen(a)?;
    let mut scaled = v.clone();
    for (j, l) in vals.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= l.abs();
        }
    }
    Ok(&scaled * v.adjoint())
}

/// `F# = |Re F| + |Im F|` with `Re F = (F + F^H)/2` and `Im F = (F - F^H)/(2i)`.
pub fn f_sharp_of(f: &Mat<c64>) -> Result<Mat<c64>> {
    if f.nrows() != f.ncols() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", f.nrows(), f.ncols())));
    }
    let n = f.nrows();
    let re = Mat::<c64>::from_fn(n, n, |i, j| (f[(i, j)] + f[(j, i)].conj()) * 0.5);
    let im = Mat::<c64>::from_fn(n, n, |i, j| (f[(i, j)] - f[(j, i)].conj()) * c64::new(0.0, -0.5));
    Ok(hermitian_abs(&re)? + hermitian_abs(&im)?)
}

/// `F# ` of `F = T N` together with its eigensystem.
pub fn f_sharp(t: &OtIMatrix, n: &NearFieldMatrix) -> Result<(Mat<c64>, EigenSystem)> {
    let tm = t.matrix();
    if tm.ncols() != n.matrix().nrows() || tm.nrows() != n.matrix().ncols() {
        return Err(Error::Shape(format!(
            "OtI matrix {}x{} does not match near-field matrix {}x{}",
            tm.nrows(),
            tm.ncols(),
            n.matrix().nrows(),
            n.matrix().ncols()
        )));
    }
    let f = tm * n.matrix();
    let fs = f_sharp_of(&f)?;
    let eig = EigenSystem::new(&fs)?;
    Ok((fs, eig))
}

/// Which eigenpairs enter the Picard series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// The first `J` pairs.
    Fixed(usize),
    /// All pairs with `|lambda_j| >= tau |lambda_1|`.
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub truncation: Truncation,
    /// Pairs with `|lambda_j| < eps |lambda_1|` are always skipped.
    pub eps_lambda: f64,
    /// Value reported when the series is empty.
    pub cap: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { truncation: Truncation::Relative(1e-6), eps_lambda: 1e-12, cap: 1e30 }
    }
}

impl PicardOptions {
    /// Number of leading pairs used for an eigensystem.
    pub fn terms(&self, eigs: &EigenSystem) -> Result<usize> {
        let vals = eigs.values();
        let top = vals.first().map_or(0.0, |v| v.abs());
        let floor = self.eps_lambda * top;
        let limit = match self.truncation {
            Truncation::Fixed(j) => {
                if j > vals.len() {
                    return Err(Error::InvalidParameter(format!(
                        "truncation {j} exceeds the {} available eigenpairs",
                        vals.len()
                    )));
                }
                j
            }
            Truncation::Relative(tau) => {
                if !(tau >= 0.0) {
                    return Err(Error::InvalidParameter(format!("relative cutoff must be nonnegative, got {tau}")));
                }
                vals.iter().take_while(|v| v.abs() >= tau * top).count()
            }
        };
        Ok(vals[..limit].iter().take_while(|v| v.abs() >= floor && v.abs() > 0.0).count())
    }
}

/// `W = 1 / sum_j |<phi, psi_j>_w|^2 / |lambda_j|` with `psi_j` normalized in
/// the weighted product `<f, g>_w = w sum f conj(g)`.
pub fn picard_w(eigs: &EigenSystem, phi: &[c64], weight: f64, options: &PicardOptions) -> Result<f64> {
    let v = eigs.vectors();
    if phi.len() != v.nrows() {
        return Err(Error::Shape(format!(
            "test function has length {}, eigenvectors have length {}",
            phi.len(),
            v.nrows()
        )));
    }
    let terms = options.terms(eigs)?;
    let sum = picard_sum(eigs, phi, weight, terms);
    Ok(if sum > 0.0 { (1.0 / sum).min(options.cap) } else { options.cap })
}

fn picard_sum(eigs: &EigenSystem, phi: &[c64], weight: f64, terms: usize) -> f64 {
    let v = eigs.vectors();
    (0..terms)
        .map(|j| {
            let ip: c64 = (0..phi.len()).map(|i| v[(i, j)].conj() * phi[i]).sum();
            weight * ip.norm_sqr() / eigs.values()[j].abs()
        })
        .sum()
}

/// Rectangular grid of probe points, `x` fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width, nx: n, ny: n }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.nx >= 2
            && self.ny >= 2
            && self.x_max > self.x_min
            && self.y_max > self.y_min
            && [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, ix: usize, iy: usize) -> Point {
        let x = self.x_min + (self.x_max - self.x_min) * ix as f64 / (self.nx - 1) as f64;
        let y = self.y_min + (self.y_max - self.y_min) * iy as f64 / (self.ny - 1) as f64;
        [x, y]
    }
}

/// Indicator values on a grid; `None` marks nodes outside the measurement circle.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    spec: GridSpec,
    values: Vec<Option<f64>>,
}

/// Connected set of grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub nodes: Vec<(usize, usize)>,
    pub centroid: Point,
    pub peak: f64,
}

impl IndicatorGrid {
    pub fn from_values(spec: GridSpec, values: Vec<Option<f64>>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::Shape(format!("{} values for a grid of {} nodes", values.len(), spec.len())));
        }
        Ok(Self { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.spec.nx + ix]
    }

    /// Evaluated nodes with their positions.
    pub fn nodes(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        (0..self.spec.ny).flat_map(move |iy| {
            (0..self.spec.nx).filter_map(move |ix| self.get(ix, iy).map(|w| (self.spec.node(ix, iy), w)))
        })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Components (8-connectivity) of nodes with `W >= fraction * max W`,
    /// largest peak first.
    pub fn components(&self, fraction: f64) -> Vec<Component> {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let level = fraction * self.max();
        let above = |ix: usize, iy: usize| self.get(ix, iy).is_some_and(|w| w >= level);
        let mut seen = vec![false; nx * ny];
        let mut out = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                if seen[iy * nx + ix] || !above(ix, iy) {
                    continue;
                }
                seen[iy * nx + ix] = true;
                let mut stack = vec![(ix, iy)];
                let mut nodes = Vec::new();
                while let Some((cx, cy)) = stack.pop() {
                    nodes.push((cx, cy));
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (qx, qy) = (cx as i64 + dx, cy as i64 + dy);
                            if qx < 0 || qy < 0 || qx >= nx as i64 || qy >= ny as i64 {
                                continue;
                            }
                            let (qx, qy) = (qx as usize, qy as usize);
                            if !seen[qy * nx + qx] && above(qx, qy) {
                                seen[qy * nx + qx] = true;
                                stack.push((qx, qy));
                            }
                        }
                    }
                }
                nodes.sort_unstable_by_key(|&(x, y)| (y, x));
                let mut c = [0.0, 0.0];
                let mut peak: f64 = 0.0;
                for &(x, y) in &nodes {
                    let p = self.spec.node(x, y);
                    c[0] += p[0];
                    c[1] += p[1];
                    peak = peak.max(self.get(x, y).unwrap_or(0.0));
                }
                let k = nodes.len() as f64;
                out.push(Component { nodes, centroid: [c[0] / k, c[1] / k], peak });
            }
        }
        out.sort_by(|a, b| b.peak.total_cmp(&a.peak));
        out
    }

    /// Rows `x,y,W`; nodes outside the circle carry `nan`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "x,y,W")?;
        for iy in 0..self.spec.ny {
            for ix in 0..self.spec.nx {
                let p = self.spec.node(ix, iy);
                match self.get(ix, iy) {
                    Some(w) => writeln!(out, "{:.16e},{:.16e},{:.16e}", p[0], p[1], w)?,
                    None => writeln!(out, "{:.16e},{:.16e},nan", p[0], p[1])?,
                }
            }
        }
        Ok(())
    }

    /// Plain PGM (P2) image, linear in `[0, max W]`, top row at the largest `y`.
    pub fn write_pgm<W: Write>(&self, out: &mut W) -> Result<()> {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let max = self.max();
        writeln!(out, "P2\n{nx} {ny}\n255")?;
        for iy in (0..ny).rev() {
            let row: Vec<String> = (0..nx)
                .map(|ix| {
                    let w = self.get(ix, iy).unwrap_or(0.0);
                    let v = if max > 0.0 { (255.0 * w / max).round().clamp(0.0, 255.0) } else { 0.0 };
                    (v as u8).to_string()
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Combined indicator `W = 1 / sum_a 1/W^a` over polarization angles.
pub fn indicator_scan(
    eigs: &EigenSystem,
    medium: &ElasticMedium,
    circle: &MeasurementCircle,
    grid: &GridSpec,
    alphas: &[f64],
    options: &PicardOptions,
) -> Result<IndicatorGrid> {
    grid.validate()?;
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("at least one polarization angle is required".into()));
    }
    if eigs.vectors().nrows() != 2 * circle.len() {
        return Err(Error::Shape("eigensystem does not match the measurement circle".into()));
    }
    let terms = options.terms(eigs)?;
    let receivers = circle.points();
    let weight = circle.weight();
    let pols: Vec<Point> = alphas.iter().map(|&a| polarization(a)).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut any_inside = false;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let z = grid.node(ix, iy);
            if !(norm(z) < circle.radius()) {
                values.push(None);
                continue;
            }
            any_inside = true;
            let greens = receivers
                .iter()
                .map(|x| navier_green(medium, *x, z))
                .collect::<Result<Vec<_>>>()?;
            let mut inv_sum = 0.0;
            for a in &pols {
                let phi: Vec<c64> = greens
                    .iter()
                    .flat_map(|g| {
                        let v = g.mul_real_vec(*a);
                        [v[0].conj(), v[1].conj()]
                    })
                    .collect();
                let s = picard_sum(eigs, &phi, weight, terms);
                let w = if s > 0.0 { (1.0 / s).min(options.cap) } else { options.cap };
                inv_sum += 1.0 / w;
            }
            values.push(Some(1.0 / inv_sum));
        }
    }
    if !any_inside {
        return Err(Error::InvalidParameter("no grid node lies inside the measurement circle".into()));
    }
    IndicatorGrid::from_values(*grid, values)
}
