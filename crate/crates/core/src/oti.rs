//! Outgoing-to-incoming operator on the measurement circle.

use std::f64::consts::TAU;
use std::io::Write;

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg2::{self, Mat2};
use crate::matrix_io;
use crate::medium_geometry::{ElasticMedium, MeasurementCircle};
use crate::specfun::{hankel1_with_deriv_all, MAX_ORDER};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Column-equilibrated condition number above which a modal matrix is
/// treated as singular.
pub const MAX_MODAL_CONDITION: f64 = 1e12;

/// `M(theta) = [[cos, sin], [-sin, cos]]`.
pub fn rotation_m(theta: f64) -> [[f64; 2]; 2] {
    linalg2::rotation(theta)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

fn check_order(n: i32) -> Result<()> {
    if n.abs() > MAX_ORDER {
        return Err(Error::OrderOutOfRange { order: n, max: MAX_ORDER });
    }
    Ok(())
}

/// Hankel data `(H_n(k r), H_n'(k r))` with reflection for negative orders.
fn hankel_pair(n: i32, x: f64) -> Result<(Complex64, Complex64)> {
    let m = n.unsigned_abs() as usize;
    let (h, d) = hankel1_with_deriv_all(m, x)?;
    let sign = if n < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    Ok((sign * h[m], sign * d[m]))
}

fn modal(medium: &ElasticMedium, n: i32, r: f64, conjugate: bool) -> Result<Mat2> {
    check_radius(r)?;
    check_order(n)?;
    let (kp, ks) = (medium.kp(), medium.ks());
    let (mut hp, mut dp) = hankel_pair(n, kp * r)?;
    let (mut hs, mut ds) = hankel_pair(n, ks * r)?;
    if conjugate {
        hp = hp.conj();
        dp = dp.conj();
        hs = hs.conj();
        ds = ds.conj();
    }
    let inr = I * (n as f64) / r;
    Ok(Mat2::new(kp * dp, -inr * hs, inr * hp, ks * ds))
}

/// Outgoing modal matrix `A_n(r)`.
pub fn a_n_matrix(medium: &ElasticMedium, n: i32, r: f64) -> Result<Mat2> {
    modal(medium, n, r, false)
}

/// Incoming modal matrix `B_n(r)`: Hankel values conjugated, `i n` factors kept.
pub fn b_n_matrix(medium: &ElasticMedium, n: i32, r: f64) -> Result<Mat2> {
    modal(medium, n, r, true)
}

/// Per-order products `B_n(R) A_n(R)^{-1}` for `|n| <= M1`.
#[derive(Debug, Clone)]
pub struct ModalTable {
    m1: usize,
    radius: f64,
    blocks: Vec<Mat2>,
}

impl ModalTable {
    pub fn new(medium: &ElasticMedium, m1: usize, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let m1i = i32::try_from(m1).unwrap_or(i32::MAX);
        check_order(m1i)?;
        let mut blocks = Vec::with_capacity(2 * m1 + 1);
        for n in -m1i..=m1i {
            let a = a_n_matrix(medium, n, radius)?;
            let condition = a.equilibrated_condition();
            let (a_inv, _) = a.inverse_with_condition();
            if !(condition <= MAX_MODAL_CONDITION) {
                return Err(Error::SingularModalMatrix { order: n, condition });
            }
            blocks.push(b_n_matrix(medium, n, radius)? * a_inv);
        }
        Ok(Self { m1, radius, blocks })
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `B_n A_n^{-1}` for order `n`.
    pub fn block(&self, n: i32) -> Option<Mat2> {
        let idx = n + self.m1 as i32;
        usize::try_from(idx).ok().and_then(|k| self.blocks.get(k)).copied()
    }

    /// The modal sum `sum_n B_n A_n^{-1} e^{i n delta}` without outer rotations.
    fn angular_sum(&self, delta: f64) -> Mat2 {
        let m1 = self.m1 as i32;
        self.blocks
            .iter()
            .zip(-m1..=m1)
            .fold(Mat2::ZERO, |acc, (b, n)| {
                acc + b.scale(Complex64::from_polar(1.0, n as f64 * delta))
            })
    }

    /// Truncated kernel `K_{M1}(theta_x, theta_y)` on the circle of this table.
    pub fn kernel(&self, theta_x: f64, theta_y: f64) -> Mat2 {
        let s = self.angular_sum(theta_x - theta_y);
        let mx = Mat2::from_real(rotation_m(theta_x)).transpose();
        let my = Mat2::from_real(rotation_m(theta_y));
        (mx * s * my).scale((-1.0 / (TAU * self.radius)).into())
    }
}

/// Truncated kernel `K_{M1}(x, y)` for `x`, `y` on the circle of radius `radius`.
pub fn oti_kernel(
    medium: &ElasticMedium,
    m1: usize,
    radius: f64,
    theta_x: f64,
    theta_y: f64,
) -> Result<Mat2> {
    Ok(ModalTable::new(medium, m1, radius)?.kernel(theta_x, theta_y))
}

/// Discrete OtI operator on the measurement circle.
#[derive(Debug, Clone)]
pub struct OtIMatrix {
    matrix: Mat<c64>,
    m1: usize,
    weighted: bool,
}

impl OtIMatrix {
    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    /// Dumps entries as `row,col,re,im` lines.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let header = format!("oti v1 M1={} weighted={}", self.m1, self.weighted);
        matrix_io::write_entries(out, Some(&header), self.matrix.as_ref())
    }
}

/// Options controlling the discrete operator.
#[derive(Debug, Clone, Copy)]
pub struct OtIOptions {
    /// Multiply blocks by the quadrature weight `2 pi R / m2`.
    pub weighted: bool,
    /// Permit `M1 >= m2/2`, which aliases high orders on the grid.
    pub allow_aliasing: bool,
}

impl Default for OtIOptions {
    fn default() -> Self {
        Self { weighted: true, allow_aliasing: false }
    }
}

/// Assembles the `(2 m2) x (2 m2)` matrix with block `(i, j) = K(x_i, y_j) w`.
pub fn assemble_oti(medium: &ElasticMedium, m1: usize, circle: &MeasurementCircle) -> Result<OtIMatrix> {
    assemble_oti_with(medium, m1, circle, OtIOptions::default())
}

pub fn assemble_oti_with(
    medium: &ElasticMedium,
    m1: usize,
    circle: &MeasurementCircle,
    options: OtIOptions,
) -> Result<OtIMatrix> {
    let m2 = circle.len();
    if !options.allow_aliasing && 2 * m1 >= m2 {
        return Err(Error::InvalidParameter(format!(
            "M1 = {m1} aliases on {m2} points (need M1 < {})",
            m2 / 2
        )));
    }
    let table = ModalTable::new(medium, m1, circle.radius())?;
    let w = if options.weighted { circle.weight() } else { 1.0 };
    let scale = Complex64::from(-w / (TAU * circle.radius()));
    // the modal sum depends only on the index difference
    let sums: Vec<Mat2> = (0..m2)
        .map(|k| table.angular_sum(TAU * k as f64 / m2 as f64).scale(scale))
        .collect();
    let rots: Vec<Mat2> = (0..m2).map(|j| Mat2::from_real(rotation_m(circle.angle(j)))).collect();
    let mut matrix = Mat::<c64>::zeros(2 * m2, 2 * m2);
    for i in 0..m2 {
        let left = rots[i].transpose();
        for j in 0..m2 {
            let blk = left * sums[(i + m2 - j) % m2] * rots[j];
            for a in 0..2 {
                for b in 0..2 {
                    matrix[(2 * i + a, 2 * j + b)] = blk.get(a, b);
                }
            }
        }
    }
    Ok(OtIMatrix { matrix, m1, weighted: options.weighted })
}
