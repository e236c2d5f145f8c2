//! Versioned JSON containers for trained artifacts.
//!
//! One file holds the network (layer dims, then row-major weights and
//! biases per layer), the Gaussian posterior over its parameter subset,
//! the per-layer kernel variances, and the standardizer of the training
//! inputs. Tuned variances are stored in a small sibling file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::kernels::LayeredDscsParams;
use crate::laplace::GaussianPosterior;
use crate::network::ReluNet;

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to evaluate a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub net: ReluNet,
    pub posterior: GaussianPosterior,
    pub sigma2: LayeredDscsParams,
    pub standardizer: Standardizer,
}

impl ModelArtifact {
    pub fn new(
        net: ReluNet,
        posterior: GaussianPosterior,
        sigma2: LayeredDscsParams,
        standardizer: Standardizer,
    ) -> Self {
        ModelArtifact {
            format_version: FORMAT_VERSION,
            net,
            posterior,
            sigma2,
            standardizer,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let artifact: ModelArtifact = serde_json::from_str(&text)?;
        if artifact.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported artifact version {} (expected {})",
                artifact.format_version, FORMAT_VERSION
            )));
        }
        Ok(artifact)
    }
}

/// Stand-alone kernel-variance file written by tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaFile {
    pub format_version: u32,
    pub sigma2_per_layer: Vec<f64>,
}

impl SigmaFile {
    pub fn new(sigma2: &LayeredDscsParams) -> Self {
        SigmaFile {
            format_version: FORMAT_VERSION,
            sigma2_per_layer: sigma2.sigma2_per_layer.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<LayeredDscsParams> {
        let text = std::fs::read_to_string(path)?;
        let file: SigmaFile = serde_json::from_str(&text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported sigma file version {} (expected {})",
                file.format_version, FORMAT_VERSION
            )));
        }
        LayeredDscsParams::new(file.sigma2_per_layer)
    }
}
