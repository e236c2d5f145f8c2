//! Experiment configuration: a flat JSON object with defaults, overridden
//! by CLI flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rgpr::error::{Error, Result};

/// Which synthetic task an experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetKind {
    #[serde(rename = "two_moons")]
    TwoMoons,
    #[serde(rename = "toy_regression_1d")]
    ToyRegression1d,
}

/// Parameter subset of the Laplace posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetKind {
    LastLayer,
    All,
}

impl From<SubsetKind> for rgpr::network::ParamSubset {
    fn from(s: SubsetKind) -> Self {
        match s {
            SubsetKind::LastLayer => rgpr::network::ParamSubset::LastLayer,
            SubsetKind::All => rgpr::network::ParamSubset::All,
        }
    }
}

/// Kernel variance specification: one value for every layer, explicit
/// per-layer values, or "tune".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Tune(String),
    Constant(f64),
    PerLayer(Vec<f64>),
}

impl SigmaSpec {
    pub fn wants_tuning(&self) -> Result<bool> {
        match self {
            SigmaSpec::Tune(s) if s == "tune" => Ok(true),
            SigmaSpec::Tune(s) => Err(Error::Format(format!(
                "sigma2 must be a number, an array, or \"tune\"; got {s:?}"
            ))),
            _ => Ok(false),
        }
    }
}

/// Full experiment configuration. Every field has a default, so an empty
/// config file (or none at all) describes a runnable two-moons study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub n_points: usize,
    pub noise_std: f64,
    pub arch: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Weight decay of MAP training.
    pub prior_precision: f64,
    /// Prior precision of the Laplace fit.
    pub laplace_precision: f64,
    pub subset: SubsetKind,
    pub sigma2: SigmaSpec,
    pub alpha_grid: Vec<f64>,
    pub mc_samples: usize,
    pub seed: u64,
    pub out_dir: String,
    /// Evaluation set sizes.
    pub n_eval: usize,
    pub n_outliers: usize,
    pub outlier_alpha: f64,
    /// Residual-GP baseline (regression only).
    pub bno_kernel_sigma2: f64,
    pub bno_noise_var: f64,
    /// Kernel-variance tuning.
    pub tune_learning_rate: f64,
    pub tune_epochs: usize,
    pub tune_batch: usize,
    pub tune_scales: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetKind::TwoMoons,
            n_points: 500,
            noise_std: 0.1,
            arch: vec![2, 20, 20, 2],
            learning_rate: 5e-3,
            epochs: 200,
            batch_size: 32,
            prior_precision: 1.0,
            laplace_precision: 10.0,
            subset: SubsetKind::LastLayer,
            sigma2: SigmaSpec::Constant(1.0),
            alpha_grid: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
            mc_samples: 10,
            seed: 0,
            out_dir: "rgpr_run".into(),
            n_eval: 1000,
            n_outliers: 2000,
            outlier_alpha: 2000.0,
            bno_kernel_sigma2: 0.01,
            bno_noise_var: 0.01,
            tune_learning_rate: 0.1,
            tune_epochs: 10,
            tune_batch: 100,
            tune_scales: vec![1.0, 10.0, 100.0],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("bad config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arch.len() < 2 {
            return Err(Error::Format("arch needs at least [input, output]".into()));
        }
        let expected_in = match self.dataset {
            DatasetKind::TwoMoons => 2,
            DatasetKind::ToyRegression1d => 1,
        };
        if self.arch[0] != expected_in {
            return Err(Error::Format(format!(
                "arch input dim {} does not match dataset dim {expected_in}",
                self.arch[0]
            )));
        }
        if self.dataset == DatasetKind::ToyRegression1d && *self.arch.last().unwrap() != 1 {
            return Err(Error::Format("regression arch must end in 1 output".into()));
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| *a <= 0.0) {
            return Err(Error::Format("alpha_grid must be positive".into()));
        }
        if self.mc_samples == 0 {
            return Err(Error::Format("mc_samples must be at least 1".into()));
        }
        self.sigma2.wants_tuning()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn is_classification(&self) -> bool {
        self.dataset == DatasetKind::TwoMoons
    }
}
