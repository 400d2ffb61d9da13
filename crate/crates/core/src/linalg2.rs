//! Fixed-size complex 2-vectors and 2x2 matrices.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type CVec2 = [Complex64; 2];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO; 2]; 2]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Mat2([[one, ZERO], [ZERO, one]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [m[0][0].into(), m[0][1].into()],
            [m[1][0].into(), m[1][1].into()],
        ])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn conj(&self) -> Self {
        let m = self.0;
        Mat2([
            [m[0][0].conj(), m[0][1].conj()],
            [m[1][0].conj(), m[1][1].conj()],
        ])
    }

    pub fn det(&self) -> Complex64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = self.0;
        Mat2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn mul_vec(&self, v: CVec2) -> CVec2 {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn mul_real_vec(&self, v: [f64; 2]) -> CVec2 {
        let m = self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Inverse together with the 2-norm condition number.
    pub fn inverse_with_condition(&self) -> (Mat2, f64) {
        let det = self.det();
        let m = self.0;
        let inv = Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(det.inv());
        let (smax, smin) = self.singular_values();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        (inv, cond)
    }

    /// Condition number after scaling each column to unit norm, which ignores
    /// disparities in column scale.
    pub fn equilibrated_condition(&self) -> f64 {
        let m = self.0;
        let mut scaled = *self;
        for j in 0..2 {
            let c = (m[0][j].norm_sqr() + m[1][j].norm_sqr()).sqrt();
            if c == 0.0 {
                return f64::INFINITY;
            }
            scaled.0[0][j] /= c;
            scaled.0[1][j] /= c;
        }
        let (smax, smin) = scaled.singular_values();
        if smin > 0.0 { smax / smin } else { f64::INFINITY }
    }

    /// Singular values (largest first).
    pub fn singular_values(&self) -> (f64, f64) {
        let fro2 = self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
        let d = self.det().norm();
        // s1^2 + s2^2 = fro2 and s1 s2 = |det|
        let disc = (fro2 * fro2 - 4.0 * d * d).max(0.0).sqrt();
        let s1 = (0.5 * (fro2 + disc)).sqrt();
        let s2 = if s1 > 0.0 { d / s1 } else { 0.0 };
        (s1, s2)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Rotation taking Cartesian components to (radial, angular) components at
/// polar angle `theta`: `[[cos, sin], [-sin, cos]]`.
pub fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}
