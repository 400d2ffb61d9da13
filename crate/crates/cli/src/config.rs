//! Run configuration: JSON file with flat keys, built-in presets and validation.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use elastic_fm::factorization::{GridSpec, PicardOptions, Truncation};
use elastic_fm::medium_geometry::{ElasticMedium, MeasurementCircle, ParametricBoundary, Scene, Shape};

/// Error in user-supplied configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub shape: String,
    pub center: [f64; 2],
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
    /// Measurement circle radius.
    pub radius: f64,
    /// Number of receivers (and sources) on the circle.
    pub m2: usize,
    /// OtI truncation order; `null` picks the default for the mode.
    pub m1: Option<usize>,
    /// Fixed number of Picard terms; `null` uses the relative cutoff.
    pub truncation: Option<usize>,
    /// Relative eigenvalue cutoff for the Picard series.
    pub truncation_rel: f64,
    pub obstacles: Vec<ObstacleConfig>,
    pub grid_x_min: f64,
    pub grid_x_max: f64,
    pub grid_y_min: f64,
    pub grid_y_max: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Polarization angles in radians.
    pub alphas: Vec<f64>,
    pub noise: f64,
    pub seed: u64,
    /// Mirror the published parameters (M1 = 40, Picard sum to M1).
    pub paper_exact: bool,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            mu: 1.0,
            omega: 10.0,
            radius: 4.0,
            m2: 64,
            m1: None,
            truncation: None,
            truncation_rel: 1e-6,
            obstacles: Vec::new(),
            grid_x_min: -3.0,
            grid_x_max: 3.0,
            grid_y_min: -3.0,
            grid_y_max: 3.0,
            grid_nx: 101,
            grid_ny: 101,
            alphas: vec![2.0 * PI / 3.0],
            noise: 0.0,
            seed: 1,
            paper_exact: false,
            out_dir: "out".into(),
        }
    }
}

/// Polarization angles of the combined panels: 0, pi/2, 2 pi/3.
pub const MULTI_ALPHAS: [f64; 3] = [0.0, PI / 2.0, 2.0 * PI / 3.0];

impl RunConfig {
    /// Built-in example 1 (kite), 2 (star) or 3 (star and small kite).
    pub fn example(id: u8) -> Result<Self> {
        let ob = |shape: &str, center: [f64; 2], scale: f64| ObstacleConfig {
            shape: shape.into(),
            center,
            scale,
        };
        let base = Self::default();
        Ok(match id {
            1 => Self { obstacles: vec![ob("kite", [0.0, 0.0], 1.0)], out_dir: "out/example1".into(), ..base },
            2 => Self { obstacles: vec![ob("star", [0.0, 0.0], 1.0)], out_dir: "out/example2".into(), ..base },
            3 => Self {
                obstacles: vec![ob("star", [2.0, 2.0], 1.0), ob("kite", [-1.0, -1.0], 0.5)],
                grid_x_min: -3.5,
                grid_x_max: 3.5,
                grid_y_min: -3.5,
                grid_y_max: 3.5,
                alphas: MULTI_ALPHAS.to_vec(),
                noise: 0.02,
                out_dir: "out/example3".into(),
                ..base
            },
            _ => bail!(config_error(format!("unknown example {id}; expected 1, 2 or 3"))),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_error(format!("invalid JSON config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn m1(&self) -> usize {
        self.m1.unwrap_or(if self.paper_exact { 40 } else { (self.m2 / 2).saturating_sub(1) })
    }

    pub fn picard(&self) -> PicardOptions {
        let truncation = match (self.truncation, self.paper_exact) {
            (Some(j), _) => Truncation::Fixed(j),
            (None, true) => Truncation::Fixed(self.m1()),
            (None, false) => Truncation::Relative(self.truncation_rel),
        };
        PicardOptions { truncation, ..PicardOptions::default() }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            x_min: self.grid_x_min,
            x_max: self.grid_x_max,
            y_min: self.grid_y_min,
            y_max: self.grid_y_max,
            nx: self.grid_nx,
            ny: self.grid_ny,
        }
    }

    pub fn medium(&self) -> Result<ElasticMedium> {
        ElasticMedium::new(self.lambda, self.mu, self.omega).map_err(|e| config_error(e.to_string()))
    }

    pub fn circle(&self) -> Result<MeasurementCircle> {
        MeasurementCircle::new(self.radius, self.m2).map_err(|e| config_error(e.to_string()))
    }

    pub fn obstacles(&self) -> Result<Vec<ParametricBoundary>> {
        self.obstacles
            .iter()
            .map(|o| {
                let shape: Shape = o.shape.parse().map_err(|e: elastic_fm::Error| config_error(e.to_string()))?;
                ParametricBoundary::new(shape, o.center, o.scale).map_err(|e| config_error(e.to_string()))
            })
            .collect()
    }

    pub fn scene(&self) -> Result<Scene> {
        Scene::new(self.medium()?, self.obstacles()?, self.circle()?).map_err(|e| config_error(e.to_string()))
    }

    /// Checks every parameter before any computation.
    pub fn validate(&self) -> Result<()> {
        self.scene()?;
        let m1 = self.m1();
        if !self.paper_exact && 2 * m1 >= self.m2 {
            bail!(config_error(format!(
                "M1 = {m1} aliases on {} receivers; use M1 < {} or --paper-exact",
                self.m2,
                self.m2 / 2
            )));
        }
        if self.grid().validate().is_err() {
            bail!(config_error("grid needs nx, ny >= 2 and increasing finite bounds"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !a.is_finite()) {
            bail!(config_error("at least one finite polarization angle is required"));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            bail!(config_error(format!("noise must be nonnegative, got {}", self.noise)));
        }
        if !(self.truncation_rel >= 0.0) {
            bail!(config_error("truncation_rel must be nonnegative"));
        }
        if let Some(j) = self.truncation {
            if j == 0 || j > 2 * self.m2 {
                bail!(config_error(format!("truncation must lie in 1..={}", 2 * self.m2)));
            }
        }
        Ok(())
    }
}

/// Parses a comma-separated angle list; items may use `pi`, e.g. `0,pi/2,2pi/3`.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|s| parse_angle(s.trim())).collect()
}

fn parse_angle(s: &str) -> Result<f64> {
    let bad = || config_error(format!("cannot parse angle `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*');
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    Ok(value / den)
}

/// Parses `NX,NY`.
pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || config_error(format!("grid must be NX,NY, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}
