//! Cylindrical Bessel and Hankel functions of integer order and real argument.
//!
//! `J_n` comes from Miller's downward recurrence normalized with
//! `J_0 + 2 Σ J_2k = 1`. `Y_0` and `Y_1` are the Neumann series over the same
//! normalized `J_k` sequence, and higher `Y_n` follow by upward recurrence.
//! Both directions are the stable ones for their respective functions.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest |order| accepted by the public entry points.
pub const MAX_ORDER: i32 = 128;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_LIMIT: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;

fn reflection_sign(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_order(n: i32) -> Result<()> {
    if n.abs() > MAX_ORDER {
        return Err(Error::OrderOutOfRange {
            order: n,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Starting index for the downward recurrence, chosen so that
/// `J_start(x) / max_k |J_k(x)|` is below double precision.
fn miller_start(nmax: usize, x: f64) -> usize {
    let base = (nmax as f64).max(x.ceil());
    let start = base as usize + 30 + (10.0 * x.cbrt()).ceil() as usize;
    start + (start & 1)
}

/// Normalized `J_0(x) ..= J_start(x)` for x > 0, where `start >= nmax`.
fn miller_sequence(nmax: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = miller_start(nmax, x);
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j[k - 1];
        }
        if j[k - 1].abs() > RESCALE_LIMIT {
            for v in &mut j[k - 1..] {
                *v *= RESCALE_FACTOR;
            }
            norm *= RESCALE_FACTOR;
        }
    }
    norm += j[0];
    j.truncate(start + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// `Y_0` and `Y_1` from the Neumann series over a normalized `J` sequence.
fn neumann_y01(j: &[f64], x: f64) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = FRAC_2_PI * log_term * j[1] - FRAC_2_PI * j[0] / x + FRAC_2_PI * s1;
    (y0, y1)
}

/// `J_0(x) ..= J_nmax(x)` for x >= 0.
pub fn bessel_j_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "bessel_j",
            value: x,
        });
    }
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let mut j = miller_sequence(nmax, x);
    j.truncate(nmax + 1);
    Ok(j)
}

/// `Y_0(x) ..= Y_nmax(x)` for x > 0. Entries may overflow to -inf for
/// large orders at small arguments.
pub fn bessel_y_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "bessel_y",
            value: x,
        });
    }
    let j = miller_sequence(nmax.max(1), x);
    let (y0, y1) = neumann_y01(&j, x);
    Ok(upward_y(nmax, x, y0, y1))
}

fn upward_y(nmax: usize, x: f64, y0: f64, y1: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    y
}

/// `H^(1)_0(x) ..= H^(1)_nmax(x)` for x > 0.
pub fn hankel1_all(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "hankel1",
            value: x,
        });
    }
    let j = miller_sequence(nmax.max(1), x);
    let (y0, y1) = neumann_y01(&j, x);
    let y = upward_y(nmax, x, y0, y1);
    Ok(j.iter()
        .zip(&y)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect())
}

/// `(H^(1)_0(x), H^(1)_1(x))` without heap allocation. This is the hot path
/// of every Green-tensor evaluation.
pub fn hankel1_01(x: f64) -> Result<(Complex64, Complex64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            func: "hankel1",
            value: x,
        });
    }
    let start = miller_start(1, x);
    // Running sums over the unnormalized sequence, rescaled together.
    let mut above = 0.0; // j[k + 1]
    let mut cur = 1e-300; // j[k]
    let mut norm = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut j1 = 0.0;
    let mut k = start;
    let accumulate = |i: usize, v: f64, norm: &mut f64, s0: &mut f64, s1: &mut f64| {
        if i == 0 {
            return;
        }
        if i % 2 == 0 {
            let h = i / 2;
            let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
            *norm += 2.0 * v;
            *s0 += sign * v / h as f64;
        } else {
            // i = 2h - 1 enters with +sign(h)/h, i = 2h + 1 with -sign(h)/h
            let h = (i + 1) / 2;
            let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
            *s1 += sign * v / h as f64;
            if i >= 3 {
                let h = (i - 1) / 2;
                let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
                *s1 -= sign * v / h as f64;
            }
        }
    };
    accumulate(k, cur, &mut norm, &mut s0, &mut s1);
    while k > 0 {
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        accumulate(k, cur, &mut norm, &mut s0, &mut s1);
        if k == 1 {
            j1 = cur;
        }
        if cur.abs() > RESCALE_LIMIT {
            above *= RESCALE_FACTOR;
            cur *= RESCALE_FACTOR;
            norm *= RESCALE_FACTOR;
            s0 *= RESCALE_FACTOR;
            s1 *= RESCALE_FACTOR;
            j1 *= RESCALE_FACTOR;
        }
    }
    let j0_raw = cur;
    norm += j0_raw;
    let j0 = j0_raw / norm;
    let j1 = j1 / norm;
    let s0 = s0 / norm;
    let s1 = s1 / norm;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * log_term * j0 - 2.0 * FRAC_2_PI * s0;
    let y1 = FRAC_2_PI * log_term * j1 - FRAC_2_PI * j0 / x + FRAC_2_PI * s1;
    Ok((Complex64::new(j0, y0), Complex64::new(j1, y1)))
}

/// Bessel function of the first kind `J_n(x)`, x >= 0.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let j = bessel_j_all(m, x)?;
    Ok(if n < 0 { reflection_sign(n) * j[m] } else { j[m] })
}

/// Bessel function of the second kind `Y_n(x)`, x > 0.
pub fn bessel_y(n: i32, x: f64) -> Result<f64> {
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let y = bessel_y_all(m, x)?;
    Ok(if n < 0 { reflection_sign(n) * y[m] } else { y[m] })
}

/// Hankel function of the first kind `H^(1)_n(x) = J_n(x) + i Y_n(x)`, x > 0.
pub fn hankel1(n: i32, x: f64) -> Result<Complex64> {
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let h = hankel1_all(m, x)?;
    Ok(if n < 0 { reflection_sign(n) * h[m] } else { h[m] })
}

/// Derivative `H^(1)'_n(x) = H^(1)_{n-1}(x) - (n/x) H^(1)_n(x)`.
pub fn hankel1_deriv(n: i32, x: f64) -> Result<Complex64> {
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let h = hankel1_all(m.max(1), x)?;
    let d = if m == 0 {
        -h[1]
    } else {
        h[m - 1] - (m as f64 / x) * h[m]
    };
    Ok(if n < 0 { reflection_sign(n) * d } else { d })
}

/// Hankel values and derivatives for orders `0..=nmax` at one argument,
/// sharing a single recurrence.
pub fn hankel1_with_deriv_all(nmax: usize, x: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let h = hankel1_all(nmax + 1, x)?;
    let mut d = Vec::with_capacity(nmax + 1);
    d.push(-h[1]);
    for n in 1..=nmax {
        d.push(h[n - 1] - (n as f64 / x) * h[n]);
    }
    let mut h = h;
    h.truncate(nmax + 1);
    Ok((h, d))
}

/// Wronskian value `2 / (pi x)`.
pub fn wronskian(x: f64) -> f64 {
    2.0 / (PI * x)
}
