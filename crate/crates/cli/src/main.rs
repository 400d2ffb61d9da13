use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use elastic_fm_cli::config::{parse_alphas, parse_grid, RunConfig};
use elastic_fm_cli::{exit_code, log, pipeline, selftest};

#[derive(Parser)]
#[command(name = "efm", version, about = "Near-field factorization method for rigid elastic obstacles")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Relative noise level applied to the near-field data.
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// Seed of the noise stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Polarization angles in radians, e.g. `0,pi/2,2pi/3`.
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Use the published M1 = 40 (aliases on 64 receivers) and Picard sum to M1.
    #[arg(long, global = true)]
    paper_exact: bool,
    /// Grid resolution `NX,NY`.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate near-field data and write `nfm.csv`.
    Forward,
    /// Reconstruct from a near-field file.
    Reconstruct {
        /// Near-field matrix file.
        #[arg(long)]
        nfm: PathBuf,
    },
    /// Forward simulation and reconstruction for a built-in example.
    Pipeline {
        /// Example number: 1 kite, 2 star, 3 two obstacles.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

impl Cli {
    fn config(&self, base: RunConfig) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => base,
        };
        if let Some(n) = self.noise {
            c.noise = n;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(a) = &self.alpha {
            c.alphas = parse_alphas(a)?;
        }
        if self.paper_exact {
            c.paper_exact = true;
        }
        if let Some(g) = &self.grid {
            (c.grid_nx, c.grid_ny) = parse_grid(g)?;
        }
        if let Some(o) = &self.out {
            c.out_dir = o.display().to_string();
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Forward => {
            let config = cli.config(RunConfig::example(1)?)?;
            let dir = PathBuf::from(&config.out_dir);
            std::fs::create_dir_all(&dir)?;
            let nfm = pipeline::forward(&config)?;
            let path = dir.join("nfm.csv");
            pipeline::write_nfm(&path, &nfm)?;
            pipeline::write_config(&dir, &config)?;
            log!("wrote {}", path.display());
        }
        Command::Reconstruct { nfm } => {
            let config = cli.config(RunConfig::example(1)?)?;
            let data = pipeline::read_nfm(nfm)?;
            let rec = pipeline::reconstruct(&config, &data)?;
            for f in pipeline::write_reconstruction(&PathBuf::from(&config.out_dir), &config, &rec)? {
                log!("wrote {}", f.display());
            }
        }
        Command::Pipeline { example } => {
            let config = cli.config(RunConfig::example(*example)?)?;
            let dir = PathBuf::from(&config.out_dir);
            std::fs::create_dir_all(&dir)?;
            pipeline::write_config(&dir, &config)?;
            let nfm = pipeline::forward(&config)?;
            pipeline::write_nfm(&dir.join("nfm.csv"), &nfm)?;
            let rec = pipeline::reconstruct(&config, &nfm)?;
            for f in pipeline::write_reconstruction(&dir, &config, &rec)? {
                log!("wrote {}", f.display());
            }
        }
        Command::Selftest => {
            let checks = selftest::run();
            let mut failed = 0;
            for c in &checks {
                log!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                anyhow::bail!(elastic_fm::Error::Numerical(format!("{failed} self-test check(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
