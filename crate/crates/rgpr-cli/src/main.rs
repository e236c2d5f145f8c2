//! Experiment harness for RGPR uncertainty calibration.
//!
//! Exit codes: 0 on success, 2 on configuration or I/O errors, 3 on
//! numerical failures.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use rgpr::error::Error;

#[derive(Parser)]
#[command(
    name = "rgpr",
    version,
    about = "Train ReLU networks and calibrate their uncertainty with a residual GP prior"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a MAP network, fit its Laplace posterior, write artifacts.
    Train {
        /// Flat JSON config; defaults are used for missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Confidence and variance of every method across an alpha grid.
    SweepAlpha {
        /// Run directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Output CSV path (default: `<model>/sweep_alpha.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo samples per prediction.
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated grid, e.g. "1,10,100,1000".
        #[arg(long)]
        alpha_grid: Option<String>,
    },
    /// Inlier/outlier detection metrics (CSV + JSON).
    EvalOod {
        #[arg(long)]
        model: PathBuf,
        /// Output base path without extension (default: `<model>/eval_ood`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional tuned kernel-variance file to evaluate with.
        #[arg(long)]
        sigmas: Option<PathBuf>,
    },
    /// Tune the per-layer kernel variances on noise outliers.
    Tune {
        #[arg(long)]
        model: PathBuf,
        /// Output path for the variance file (default: `<model>/sigmas.json`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Predict at a single raw input point.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated raw coordinates, e.g. "0.5,-1.0".
        #[arg(long)]
        input: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad alpha {t:?}: {e}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train { config, out, seed } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(out) = out {
                cfg.out_dir = out.to_string_lossy().into_owned();
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.validate()?;
            commands::cmd_train(&cfg)
        }
        Command::SweepAlpha {
            model,
            out,
            seed,
            samples,
            alpha_grid,
        } => {
            let grid = alpha_grid.as_deref().map(parse_grid).transpose()?;
            commands::cmd_sweep_alpha(&model, out.as_deref(), seed, samples, grid)
        }
        Command::EvalOod {
            model,
            out,
            seed,
            sigmas,
        } => commands::cmd_eval_ood(&model, out.as_deref(), seed, sigmas.as_deref()),
        Command::Tune { model, out, seed } => commands::cmd_tune(&model, out.as_deref(), seed),
        Command::Predict {
            model,
            input,
            samples,
            seed,
        } => commands::cmd_predict(&model, &input, samples, seed),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::NotPositiveDefinite { .. } | Error::NonFiniteLoss { .. } => 3,
            _ => 2,
        };
        std::process::exit(code);
    }
}
