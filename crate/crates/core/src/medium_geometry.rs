//! Elastic medium, measurement circle and parametric obstacle boundaries.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A point (or vector) in the plane.
pub type Point = [f64; 2];

pub fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Homogeneous isotropic elastic background with unit mass density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticMedium {
    lambda: f64,
    mu: f64,
    omega: f64,
    kp: f64,
    ks: f64,
}

impl ElasticMedium {
    /// Requires `mu > 0`, `2 mu + 3 lambda > 0` and `omega > 0`.
    pub fn new(lambda: f64, mu: f64, omega: f64) -> Result<Self> {
        let finite = lambda.is_finite() && mu.is_finite() && omega.is_finite();
        if !finite || mu <= 0.0 || 2.0 * mu + 3.0 * lambda <= 0.0 || omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "medium needs mu > 0, 2mu + 3lambda > 0, omega > 0 (got lambda={lambda}, mu={mu}, omega={omega})"
            )));
        }
        Ok(Self {
            lambda,
            mu,
            omega,
            kp: omega / (lambda + 2.0 * mu).sqrt(),
            ks: omega / mu.sqrt(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Compressional wavenumber `omega / sqrt(lambda + 2 mu)`.
    pub fn kp(&self) -> f64 {
        self.kp
    }

    /// Shear wavenumber `omega / sqrt(mu)`.
    pub fn ks(&self) -> f64 {
        self.ks
    }
}

/// Circle of radius `radius` carrying `m2` equispaced sources and receivers,
/// the j-th (0-based) at angle `2 pi j / m2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementCircle {
    radius: f64,
    m2: usize,
}

impl MeasurementCircle {
    pub fn new(radius: f64, m2: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "measurement radius must be positive, got {radius}"
            )));
        }
        if m2 == 0 || m2 % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "number of measurement points must be a positive even integer, got {m2}"
            )));
        }
        Ok(Self { radius, m2 })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.m2
    }

    pub fn is_empty(&self) -> bool {
        self.m2 == 0
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.m2 as f64
    }

    pub fn point(&self, j: usize) -> Point {
        let t = self.angle(j);
        [self.radius * t.cos(), self.radius * t.sin()]
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.m2).map(|j| self.point(j)).collect()
    }

    /// Trapezoidal arc-length weight `2 pi R / m2`.
    pub fn weight(&self) -> f64 {
        TAU * self.radius / self.m2 as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Disk,
    Kite,
    Star,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::Kite => "kite",
            Shape::Star => "star",
        }
    }

    // Unit-scale reference curve and its first two derivatives.
    fn eval(self, t: f64) -> (Point, Point, Point) {
        let (s, c) = t.sin_cos();
        match self {
            Shape::Disk => ([c, s], [-s, c], [-c, -s]),
            Shape::Kite => {
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    [c + 0.65 * c2 - 0.65, 1.5 * s],
                    [-s - 1.3 * s2, 1.5 * c],
                    [-c - 2.6 * c2, -1.5 * s],
                )
            }
            Shape::Star => {
                let (s5, c5) = (5.0 * t).sin_cos();
                let r = 1.0 + 0.2 * c5;
                let dr = -s5;
                let ddr = -5.0 * c5;
                (
                    [r * c, r * s],
                    [dr * c - r * s, dr * s + r * c],
                    [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s],
                )
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Shape::Disk),
            "kite" => Ok(Shape::Kite),
            "star" => Ok(Shape::Star),
            other => Err(Error::InvalidParameter(format!("unknown geometry `{other}`"))),
        }
    }
}

/// Smooth closed curve `t -> center + scale * x_ref(t)`, counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricBoundary {
    shape: Shape,
    center: Point,
    scale: f64,
}

impl ParametricBoundary {
    pub fn new(shape: Shape, center: Point, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "boundary scale must be positive, got {scale}"
            )));
        }
        if !center[0].is_finite() || !center[1].is_finite() {
            return Err(Error::InvalidParameter("boundary center must be finite".into()));
        }
        Ok(Self {
            shape,
            center,
            scale,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn position(&self, t: f64) -> Point {
        let (p, _, _) = self.shape.eval(t);
        [
            self.center[0] + self.scale * p[0],
            self.center[1] + self.scale * p[1],
        ]
    }

    pub fn derivative(&self, t: f64) -> Point {
        let (_, d, _) = self.shape.eval(t);
        [self.scale * d[0], self.scale * d[1]]
    }

    pub fn second_derivative(&self, t: f64) -> Point {
        let (_, _, dd) = self.shape.eval(t);
        [self.scale * dd[0], self.scale * dd[1]]
    }

    /// Outward unit normal (the curve runs counterclockwise).
    pub fn normal(&self, t: f64) -> Point {
        let d = self.derivative(t);
        let len = norm(d);
        [d[1] / len, -d[0] / len]
    }

    /// Signed curvature; positive where the boundary is locally convex.
    pub fn curvature(&self, t: f64) -> f64 {
        let d = self.derivative(t);
        let dd = self.second_derivative(t);
        (d[0] * dd[1] - d[1] * dd[0]) / norm(d).powi(3)
    }

    /// `n` samples at `t_j = 2 pi (j + offset) / n`.
    pub fn samples(&self, n: usize, offset: f64) -> Vec<Point> {
        (0..n)
            .map(|j| self.position(TAU * (j as f64 + offset) / n as f64))
            .collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.samples(1024, 0.0)
            .into_iter()
            .map(norm)
            .fold(0.0, f64::max)
    }

    pub fn diameter_estimate(&self) -> f64 {
        let pts = self.samples(512, 0.0);
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }

    pub fn perimeter(&self) -> f64 {
        let n = 2048;
        (0..n)
            .map(|j| norm(self.derivative(TAU * j as f64 / n as f64)))
            .sum::<f64>()
            * TAU
            / n as f64
    }

    /// Area centroid of the enclosed region.
    pub fn centroid(&self) -> Point {
        let pts = self.samples(4096, 0.0);
        let mut area = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (i, p) in pts.iter().enumerate() {
            let q = pts[(i + 1) % pts.len()];
            let cross = p[0] * q[1] - q[0] * p[1];
            area += cross;
            cx += (p[0] + q[0]) * cross;
            cy += (p[1] + q[1]) * cross;
        }
        area *= 0.5;
        [cx / (6.0 * area), cy / (6.0 * area)]
    }

    /// Point-in-region test on a fine polygonal approximation.
    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, &self.samples(2048, 0.0))
    }

    /// Distance from `p` to the boundary curve (polygonal approximation).
    pub fn distance_to(&self, p: Point) -> f64 {
        let pts = self.samples(2048, 0.0);
        let mut best = f64::INFINITY;
        for (i, a) in pts.iter().enumerate() {
            let b = pts[(i + 1) % pts.len()];
            best = best.min(segment_distance(p, *a, b));
        }
        best
    }
}

pub fn kite_boundary(center: Point, scale: f64) -> Result<ParametricBoundary> {
    ParametricBoundary::new(Shape::Kite, center, scale)
}

pub fn star_boundary(center: Point, scale: f64) -> Result<ParametricBoundary> {
    ParametricBoundary::new(Shape::Star, center, scale)
}

pub fn disk_boundary(center: Point, radius: f64) -> Result<ParametricBoundary> {
    ParametricBoundary::new(Shape::Disk, center, radius)
}

pub(crate) fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    distance(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Medium, obstacles and measurement geometry for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    medium: ElasticMedium,
    obstacles: Vec<ParametricBoundary>,
    circle: MeasurementCircle,
}

impl Scene {
    /// Checks that every obstacle lies strictly inside the measurement circle
    /// and that obstacles are pairwise disjoint.
    pub fn new(
        medium: ElasticMedium,
        obstacles: Vec<ParametricBoundary>,
        circle: MeasurementCircle,
    ) -> Result<Self> {
        for (i, ob) in obstacles.iter().enumerate() {
            let extent = ob.max_norm();
            if extent >= circle.radius() {
                return Err(Error::InvalidParameter(format!(
                    "obstacle {i} ({}) reaches radius {extent:.4}, not inside the measurement circle of radius {}",
                    ob.shape(),
                    circle.radius()
                )));
            }
        }
        for i in 0..obstacles.len() {
            for j in i + 1..obstacles.len() {
                if !disjoint(&obstacles[i], &obstacles[j]) {
                    return Err(Error::InvalidParameter(format!(
                        "obstacles {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(Self {
            medium,
            obstacles,
            circle,
        })
    }

    pub fn medium(&self) -> &ElasticMedium {
        &self.medium
    }

    pub fn obstacles(&self) -> &[ParametricBoundary] {
        &self.obstacles
    }

    pub fn circle(&self) -> &MeasurementCircle {
        &self.circle
    }

    pub fn contains(&self, p: Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }
}

fn disjoint(a: &ParametricBoundary, b: &ParametricBoundary) -> bool {
    let pa = a.samples(512, 0.0);
    let pb = b.samples(512, 0.0);
    let min_gap = pa
        .iter()
        .flat_map(|p| pb.iter().map(move |q| distance(*p, *q)))
        .fold(f64::INFINITY, f64::min);
    min_gap > 0.0 && !point_in_polygon(pa[0], &pb) && !point_in_polygon(pb[0], &pa)
}

/// Angle helper used by the polarization convention `a = (cos alpha, sin alpha)`.
pub fn polarization(alpha: f64) -> Point {
    [alpha.cos(), alpha.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        distance(a, b) <= tol
    }

    #[test]
    fn reference_medium_wavenumbers() {
        let m = ElasticMedium::new(2.0, 1.0, 10.0).unwrap();
        assert!((m.kp() - 5.0).abs() < 1e-15);
        assert!((m.ks() - 10.0).abs() < 1e-15);
        assert!(m.kp() < m.ks());
        let m = ElasticMedium::new(0.0, 1.0, 1.0).unwrap();
        assert!((m.kp() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((m.ks() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn medium_constraints() {
        assert!(ElasticMedium::new(-1.0, 1.0, 10.0).is_err());
        assert!(ElasticMedium::new(1.0, 0.0, 10.0).is_err());
        assert!(ElasticMedium::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn kite_points() {
        let k = kite_boundary([0.0, 0.0], 1.0).unwrap();
        assert!(close(k.position(0.0), [1.0, 0.0], 1e-15));
        assert!(close(k.position(PI), [-1.0, 0.0], 1e-14));
        assert!(close(k.derivative(0.0), [0.0, 1.5], 1e-15));
        assert!((k.centroid()[0] + 0.325).abs() < 1e-6);
    }

    #[test]
    fn star_points() {
        let s = star_boundary([0.0, 0.0], 1.0).unwrap();
        assert!(close(s.position(0.0), [1.2, 0.0], 1e-15));
        let t = PI / 5.0;
        assert!(close(s.position(t), [0.8 * t.cos(), 0.8 * t.sin()], 1e-14));
        let moved = star_boundary([2.0, 2.0], 1.0).unwrap();
        for &t in &[0.0, 0.4, 2.2] {
            let (p, q) = (s.position(t), moved.position(t));
            assert!(close([q[0] - 2.0, q[1] - 2.0], p, 1e-14));
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let h = 1e-5;
        for b in [
            kite_boundary([0.3, -0.2], 0.8).unwrap(),
            star_boundary([1.0, 0.5], 1.1).unwrap(),
            disk_boundary([0.0, 0.0], 1.0).unwrap(),
        ] {
            for j in 0..1024 {
                let t = TAU * j as f64 / 1024.0;
                let (p, m) = (b.position(t + h), b.position(t - h));
                let d = b.derivative(t);
                let fd = [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)];
                assert!(close(d, fd, 1e-8));
                assert!(norm(d) > 1e-3);
                let (dp, dm) = (b.derivative(t + h), b.derivative(t - h));
                let fdd = [(dp[0] - dm[0]) / (2.0 * h), (dp[1] - dm[1]) / (2.0 * h)];
                assert!(close(b.second_derivative(t), fdd, 1e-7));
            }
            assert!(close(b.position(0.0), b.position(TAU), 1e-13));
        }
    }

    #[test]
    fn reference_obstacles_inside_circle() {
        for b in [
            kite_boundary([0.0, 0.0], 1.0).unwrap(),
            star_boundary([0.0, 0.0], 1.0).unwrap(),
            star_boundary([2.0, 2.0], 1.0).unwrap(),
            kite_boundary([-1.0, -1.0], 0.5).unwrap(),
        ] {
            assert!(b.max_norm() < 4.0);
        }
    }

    #[test]
    fn scene_validation() {
        let m = ElasticMedium::new(2.0, 1.0, 10.0).unwrap();
        let c = MeasurementCircle::new(4.0, 64).unwrap();
        let two = vec![
            star_boundary([2.0, 2.0], 1.0).unwrap(),
            kite_boundary([-1.0, -1.0], 0.5).unwrap(),
        ];
        assert!(Scene::new(m, two, c).is_ok());
        let overlap = vec![
            disk_boundary([0.0, 0.0], 1.0).unwrap(),
            disk_boundary([0.5, 0.0], 1.0).unwrap(),
        ];
        assert!(Scene::new(m, overlap, c).is_err());
        let nested = vec![
            disk_boundary([0.0, 0.0], 2.0).unwrap(),
            disk_boundary([0.0, 0.0], 1.0).unwrap(),
        ];
        assert!(Scene::new(m, nested, c).is_err());
        let outside = vec![disk_boundary([3.5, 0.0], 1.0).unwrap()];
        assert!(Scene::new(m, outside, c).is_err());
        assert!(MeasurementCircle::new(4.0, 63).is_err());
    }

    #[test]
    fn containment_and_distance() {
        let k = kite_boundary([0.0, 0.0], 1.0).unwrap();
        assert!(k.contains([0.0, 0.0]));
        assert!(!k.contains([-1.2, 0.0]));
        assert!((k.distance_to([2.0, 0.0]) - 1.0).abs() < 1e-6);
    }
}
