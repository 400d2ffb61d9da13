//! Forward simulation, reconstruction and output files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use elastic_fm::factorization::{
    add_noise, assemble_n_with_residuals, f_sharp, indicator_scan, EigenSystem, IndicatorGrid,
    NearFieldMatrix,
};
use elastic_fm::forward::{MfsOptions, MfsSolver};
use elastic_fm::oti::{assemble_oti_with, OtIOptions};

use crate::config::{ConfigError, RunConfig};

/// Line-oriented log on standard error.
#[macro_export]
macro_rules! log {
    ($($arg:tt)*) => { eprintln!("[efm] {}", format_args!($($arg)*)) };
}

/// Synthetic (possibly noisy) near-field data for the configured scene.
pub fn forward(config: &RunConfig) -> Result<NearFieldMatrix> {
    config.validate()?;
    let scene = config.scene()?;
    let solver = MfsSolver::for_scene(&scene, MfsOptions::default())?;
    log!(
        "forward: {} obstacle(s), {} fictitious sources, {} collocation points",
        scene.obstacles().len(),
        solver.sources().len(),
        solver.collocation_points().len()
    );
    let (clean, residuals) = assemble_n_with_residuals(&scene, &solver)?;
    for (j, r) in residuals.iter().enumerate() {
        log!("forward: source {j:>3} boundary residual {r:.3e}");
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    log!("forward: worst boundary residual {worst:.3e}");
    let data = add_noise(&clean, config.noise, config.seed)?;
    if config.noise > 0.0 {
        log!("forward: relative noise {} with seed {}", config.noise, config.seed);
    }
    Ok(data)
}

/// Indicator images: one per polarization, plus the combination when several
/// angles are configured.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub eigen: EigenSystem,
    pub terms: usize,
    pub singles: Vec<(f64, IndicatorGrid)>,
    pub combined: IndicatorGrid,
}

fn check_metadata(config: &RunConfig, nfm: &NearFieldMatrix) -> Result<()> {
    let mut diffs = Vec::new();
    let mut cmp = |name: &str, cfg: f64, file: f64| {
        if cfg != file {
            diffs.push(format!("{name}: config {cfg} vs file {file}"));
        }
    };
    cmp("m2", config.m2 as f64, nfm.circle().len() as f64);
    cmp("R", config.radius, nfm.circle().radius());
    cmp("lambda", config.lambda, nfm.medium().lambda());
    cmp("mu", config.mu, nfm.medium().mu());
    cmp("omega", config.omega, nfm.medium().omega());
    if !diffs.is_empty() {
        bail!(ConfigError(format!("near-field file does not match the configuration: {}", diffs.join("; "))));
    }
    Ok(())
}

pub fn reconstruct(config: &RunConfig, nfm: &NearFieldMatrix) -> Result<Reconstruction> {
    config.validate()?;
    check_metadata(config, nfm)?;
    let medium = config.medium()?;
    let circle = config.circle()?;
    let options = OtIOptions { allow_aliasing: config.paper_exact, ..OtIOptions::default() };
    let t = assemble_oti_with(&medium, config.m1(), &circle, options)?;
    let (_, eigen) = f_sharp(&t, nfm)?;
    let top: Vec<String> = eigen.values().iter().take(10).map(|v| format!("{:.4e}", v.abs())).collect();
    log!("reconstruct: M1 = {}, top |lambda|: {}", config.m1(), top.join(" "));
    let picard = config.picard();
    let terms = picard.terms(&eigen)?;
    log!("reconstruct: Picard series uses {terms} of {} eigenpairs", eigen.len());
    let grid = config.grid();
    let combined = indicator_scan(&eigen, &medium, &circle, &grid, &config.alphas, &picard)?;
    let singles = if config.alphas.len() > 1 {
        config
            .alphas
            .iter()
            .map(|&a| Ok((a, indicator_scan(&eigen, &medium, &circle, &grid, &[a], &picard)?)))
            .collect::<Result<_>>()?
    } else {
        vec![(config.alphas[0], combined.clone())]
    };
    Ok(Reconstruction { eigen, terms, singles, combined })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

pub fn write_nfm(path: &Path, nfm: &NearFieldMatrix) -> Result<()> {
    let mut out = create(path)?;
    nfm.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_nfm(path: &Path) -> Result<NearFieldMatrix> {
    let file = File::open(path).map_err(|e| ConfigError(format!("cannot open {}: {e}", path.display())))?;
    NearFieldMatrix::read_csv(BufReader::new(file))
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
}

pub fn write_grid(dir: &Path, stem: &str, grid: &IndicatorGrid) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    let pgm = dir.join(format!("{stem}.pgm"));
    let mut out = create(&csv)?;
    grid.write_csv(&mut out)?;
    out.flush()?;
    let mut out = create(&pgm)?;
    grid.write_pgm(&mut out)?;
    out.flush()?;
    Ok(vec![csv, pgm])
}

/// Writes `indicator.{csv,pgm}` and, for several angles, `indicator_alpha<k>.{csv,pgm}`.
pub fn write_reconstruction(dir: &Path, config: &RunConfig, rec: &Reconstruction) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = write_grid(dir, "indicator", &rec.combined)?;
    if config.alphas.len() > 1 {
        for (k, (_, g)) in rec.singles.iter().enumerate() {
            files.extend(write_grid(dir, &format!("indicator_alpha{k}"), g)?);
        }
    }
    Ok(files)
}

pub fn write_config(dir: &Path, config: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_json()?).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
