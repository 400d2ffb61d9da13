//! Fast invariant checks runnable from the command line.

use faer::{c64, Mat};

use elastic_fm::elastic_kernels::{navier_green, point_source};
use elastic_fm::factorization::f_sharp_of;
use elastic_fm::forward::{disk_series, point_source_field, scatter_at, MfsOptions, MfsSolver};
use elastic_fm::medium_geometry::{disk_boundary, ElasticMedium, MeasurementCircle};
use elastic_fm::oti::assemble_oti;
use elastic_fm::specfun::{bessel_j_all, bessel_y_all, wronskian};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check { name, passed: value <= limit, detail: format!("{value:.3e} (limit {limit:.0e})") }
}

fn wronskian_error() -> elastic_fm::Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in &[0.5, 3.0, 17.0, 120.0] {
        let j = bessel_j_all(60, x)?;
        let y = bessel_y_all(60, x)?;
        for n in 0..60 {
            let w = j[n + 1] * y[n] - j[n] * y[n + 1];
            worst = worst.max((w / wronskian(x) - 1.0).abs());
        }
    }
    Ok(worst)
}

fn green_symmetry(m: &ElasticMedium) -> elastic_fm::Result<f64> {
    let pts = [[1.0, 0.0], [0.0, 2.0], [-1.5, 0.3], [2.2, -2.1]];
    let mut worst: f64 = 0.0;
    for x in pts {
        for y in pts {
            if x != y {
                let a = navier_green(m, x, y)?;
                let b = navier_green(m, y, x)?;
                worst = worst.max(a.max_abs_diff(&b.transpose()));
            }
        }
    }
    Ok(worst)
}

fn oti_lemma(m: &ElasticMedium, circle: &MeasurementCircle) -> elastic_fm::Result<f64> {
    let t = assemble_oti(m, 31, circle)?;
    let (z, a) = ([0.5, -0.3], [1.0, 0.0]);
    let mut u = Vec::new();
    let mut want = Vec::new();
    for x in circle.points() {
        let v = point_source(m, x, z, a)?;
        u.extend(v);
        want.extend(v.map(|c| c.conj()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (i, w) in want.iter().enumerate() {
        let got: c64 = (0..u.len()).map(|j| t.matrix()[(i, j)] * u[j]).sum();
        num += (got - w).norm_sqr();
        den += w.norm_sqr();
    }
    Ok((num / den).sqrt())
}

fn f_sharp_examples() -> elastic_fm::Result<f64> {
    let i_eye = Mat::<c64>::from_fn(3, 3, |i, j| if i == j { c64::new(0.0, 1.0) } else { c64::new(0.0, 0.0) });
    let fs = f_sharp_of(&i_eye)?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((fs[(i, j)] - c64::new(want, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn disk_oracle(m: &ElasticMedium, circle: &MeasurementCircle) -> elastic_fm::Result<f64> {
    let disk = disk_boundary([0.0, 0.0], 1.0)?;
    let solver = MfsSolver::new(m, &[disk], circle.radius(), MfsOptions::default())?;
    let inc = point_source_field(*m, circle.point(0), [1.0, 0.0]);
    let sol = solver.solve(&inc)?;
    let series = disk_series(m, 1.0, &inc, 40)?;
    let pts = circle.points();
    let got = scatter_at(&sol, &pts)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (p, g) in pts.iter().zip(got) {
        let w = series.evaluate(*p)?;
        num += (g[0] - w[0]).norm_sqr() + (g[1] - w[1]).norm_sqr();
        den += w[0].norm_sqr() + w[1].norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// Runs every check; errors count as failures.
pub fn run() -> Vec<Check> {
    let m = ElasticMedium::new(2.0, 1.0, 10.0).expect("default medium is valid");
    let circle = MeasurementCircle::new(4.0, 64).expect("default circle is valid");
    let wrap = |name: &'static str, r: elastic_fm::Result<f64>, limit: f64| match r {
        Ok(v) => check(name, v, limit),
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    };
    vec![
        wrap("bessel wronskian", wronskian_error(), 1e-10),
        wrap("green tensor symmetry", green_symmetry(&m), 1e-12),
        wrap("oti point-source lemma", oti_lemma(&m, &circle), 1e-2),
        wrap("f-sharp of i*I", f_sharp_examples(), 1e-12),
        wrap("mfs vs disk series", disk_oracle(&m, &circle), 1e-6),
    ]
}
