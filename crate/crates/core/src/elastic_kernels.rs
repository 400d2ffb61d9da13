//! Fundamental solution of the time-harmonic Navier equation in the plane.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg2::{CVec2, Mat2};
use crate::medium_geometry::{distance, norm, ElasticMedium, MeasurementCircle, Point};
use crate::specfun::hankel1_01;

pub use crate::linalg2::{CVec2 as Complex2Vector, Mat2 as Complex2x2Matrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn separation(x: Point, y: Point) -> Result<f64> {
    let r = distance(x, y);
    let threshold = 1e-14 * 1f64.max(norm(x)).max(norm(y));
    if !(r >= threshold) {
        return Err(Error::CoincidentPoints { distance: r });
    }
    Ok(r)
}

/// Helmholtz fundamental solution `(i/4) H_0(k |x - y|)`.
pub fn helmholtz_phi(k: f64, x: Point, y: Point) -> Result<Complex64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
    }
    let r = separation(x, y)?;
    let (h0, _) = hankel1_01(k * r)?;
    Ok(0.25 * I * h0)
}

/// Radial profiles `(phi1, phi2)` with `Pi = phi1 I + phi2 d d^T`.
pub fn green_profiles(medium: &ElasticMedium, r: f64) -> Result<(Complex64, Complex64)> {
    let (kp, ks) = (medium.kp(), medium.ks());
    let w2 = medium.omega() * medium.omega();
    let (h0s, h1s) = hankel1_01(ks * r)?;
    let (h0p, h1p) = hankel1_01(kp * r)?;
    let phi1 = I / (4.0 * medium.mu()) * h0s - I / (4.0 * w2 * r) * (ks * h1s - kp * h1p);
    let s_term = 2.0 * ks * h1s / r - ks * ks * h0s;
    let p_term = 2.0 * kp * h1p / r - kp * kp * h0p;
    let phi2 = I / (4.0 * w2) * (s_term - p_term);
    Ok((phi1, phi2))
}

/// Green tensor `Pi(x, y)` of the Navier equation with the radiation condition.
pub fn navier_green(medium: &ElasticMedium, x: Point, y: Point) -> Result<Mat2> {
    let r = separation(x, y)?;
    let (phi1, phi2) = green_profiles(medium, r)?;
    let d = [(x[0] - y[0]) / r, (x[1] - y[1]) / r];
    let off = phi2 * (d[0] * d[1]);
    Ok(Mat2::new(
        phi1 + phi2 * (d[0] * d[0]),
        off,
        off,
        phi1 + phi2 * (d[1] * d[1]),
    ))
}

/// Incident field `Pi(x, y) a` of a point source at `y` with polarization `a`.
pub fn point_source(medium: &ElasticMedium, x: Point, y: Point, a: Point) -> Result<CVec2> {
    Ok(navier_green(medium, x, y)?.mul_real_vec(a))
}

/// Stacked probe vector `conj(Pi(x_i, z)) a` over the receivers on the circle.
pub fn test_function(
    medium: &ElasticMedium,
    circle: &MeasurementCircle,
    z: Point,
    a: Point,
) -> Result<Vec<Complex64>> {
    if !(norm(z) < circle.radius()) {
        return Err(Error::PointOutOfRange {
            x: z[0],
            y: z[1],
            reason: "is not strictly inside the measurement circle",
        });
    }
    let mut out = Vec::with_capacity(2 * circle.len());
    for x in circle.points() {
        let v = point_source(medium, x, z, a)?;
        out.push(v[0].conj());
        out.push(v[1].conj());
    }
    Ok(out)
}
