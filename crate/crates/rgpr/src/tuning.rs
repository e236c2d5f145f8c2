//! Tuning of the per-layer kernel variances by the inlier/outlier entropy
//! objective
//!
//! `L(sigma2) = E_in H(p(y|x; sigma2)) - E_out H(p(y|x; sigma2))`
//!
//! minimized with Adam steps on `log sigma2` (positivity by construction)
//! and central finite-difference gradients. The predictive `p` is the
//! probit approximation of the RGPR-augmented predictive, which keeps the
//! objective deterministic. A step-halving fallback makes the objective
//! non-increasing over the run.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::kernels::LayeredDscsParams;
use crate::laplace::probit_predict;
use crate::metrics::entropy;
use crate::numerics::{Matrix, Rng};
use crate::rgpr::{rgpr_predictive, RgprModel};

/// Where tuning outliers come from.
#[derive(Debug, Clone, PartialEq)]
pub enum OutlierSource {
    /// Uniform noise in the bounding box of the (standardized) validation
    /// inputs, scaled by each factor in turn. Scale 1 produces in-box
    /// noise, larger scales progressively farther outliers.
    UniformBox { scales: Vec<f64> },
    /// Standard Gaussian noise scaled by `alpha`.
    Gaussian { alpha: f64 },
}

impl Default for OutlierSource {
    fn default() -> Self {
        OutlierSource::UniformBox {
            scales: vec![1.0, 10.0, 100.0],
        }
    }
}

/// Tuning configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub outlier_source: OutlierSource,
    /// Outliers generated per scale factor (or in total, for Gaussian).
    pub batch: usize,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            learning_rate: 0.1,
            epochs: 10,
            outlier_source: OutlierSource::default(),
            batch: 100,
            seed: 0,
        }
    }
}

/// Draws outliers for tuning, in the same (standardized) space as the
/// validation inputs.
pub fn generate_outliers(
    source: &OutlierSource,
    val_inputs: &Matrix,
    batch: usize,
    rng: &mut Rng,
) -> Matrix {
    let n = val_inputs.cols();
    match source {
        OutlierSource::UniformBox { scales } => {
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![f64::NEG_INFINITY; n];
            for i in 0..val_inputs.rows() {
                for j in 0..n {
                    lo[j] = lo[j].min(val_inputs[(i, j)]);
                    hi[j] = hi[j].max(val_inputs[(i, j)]);
                }
            }
            let mut out = Matrix::zeros(scales.len() * batch, n);
            let mut row = 0;
            for scale in scales {
                for _ in 0..batch {
                    for j in 0..n {
                        out[(row, j)] = scale * rng.uniform_in(lo[j], hi[j]);
                    }
                    row += 1;
                }
            }
            out
        }
        OutlierSource::Gaussian { alpha } => {
            Matrix::from_fn(batch, n, |_, _| alpha * rng.standard_normal())
        }
    }
}

/// The tuning objective: mean probit-predictive entropy over inliers minus
/// mean entropy over outliers, for the model's current kernel.
pub fn entropy_objective(model: &RgprModel, inliers: &Matrix, outliers: &Matrix) -> Result<f64> {
    let mean_entropy = |points: &Matrix| -> Result<f64> {
        if points.rows() == 0 {
            return Err(Error::EmptyInput("entropy objective".into()));
        }
        let mut total = 0.0;
        for i in 0..points.rows() {
            let pred = rgpr_predictive(model, points.row(i))?;
            total += entropy(&probit_predict(&pred));
        }
        Ok(total / points.rows() as f64)
    };
    Ok(mean_entropy(inliers)? - mean_entropy(outliers)?)
}

/// Tunes the per-layer variances against explicitly provided outliers.
pub fn tune_sigmas_with_outliers(
    model: &RgprModel,
    val_data: &LabeledDataset,
    outliers: &Matrix,
    cfg: &TuneConfig,
) -> Result<LayeredDscsParams> {
    if val_data.is_empty() {
        return Err(Error::EmptyInput("tuning needs validation data".into()));
    }
    if let Some(bad) = model.kernel.sigma2_per_layer.iter().find(|v| **v <= 0.0) {
        return Err(Error::InvalidRange(format!(
            "tuning requires strictly positive initial variances, got {bad}"
        )));
    }
    let n_layers = model.kernel.len();
    let mut working = model.clone();
    let mut eval = |u: &[f64]| -> Result<f64> {
        working.kernel =
            LayeredDscsParams::new(u.iter().map(|v| v.exp()).collect()).expect("exp is positive");
        let value = entropy_objective(&working, &val_data.inputs, outliers)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteLoss {
                context: "tuning objective".into(),
                value,
            });
        }
        Ok(value)
    };
    let mut u: Vec<f64> = model
        .kernel
        .sigma2_per_layer
        .iter()
        .map(|v| v.ln())
        .collect();
    let mut current = eval(&u)?;
    let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
    let mut adam_m = vec![0.0; n_layers];
    let mut adam_v = vec![0.0; n_layers];
    let fd_step = 1e-3;
    for epoch in 0..cfg.epochs {
        // Central finite differences on log sigma2.
        let mut grad = vec![0.0; n_layers];
        for l in 0..n_layers {
            let mut up = u.clone();
            up[l] += fd_step;
            let mut dn = u.clone();
            dn[l] -= fd_step;
            grad[l] = (eval(&up)? - eval(&dn)?) / (2.0 * fd_step);
        }
        let t = (epoch + 1) as i32;
        let mut delta = vec![0.0; n_layers];
        for l in 0..n_layers {
            adam_m[l] = beta1 * adam_m[l] + (1.0 - beta1) * grad[l];
            adam_v[l] = beta2 * adam_v[l] + (1.0 - beta2) * grad[l] * grad[l];
            let mhat = adam_m[l] / (1.0 - beta1.powi(t));
            let vhat = adam_v[l] / (1.0 - beta2.powi(t));
            delta[l] = cfg.learning_rate * mhat / (vhat.sqrt() + eps);
        }
        // Step with halving fallback so the objective never increases; if
        // no halved step improves, the epoch keeps the current point.
        for _ in 0..6 {
            let candidate: Vec<f64> = u.iter().zip(&delta).map(|(ui, d)| ui - d).collect();
            let value = eval(&candidate)?;
            if value <= current {
                u = candidate;
                current = value;
                break;
            }
            for d in delta.iter_mut() {
                *d *= 0.5;
            }
        }
    }
    LayeredDscsParams::new(u.iter().map(|v| v.exp()).collect())
}

/// Tunes the per-layer variances, drawing outliers from the configured
/// source.
pub fn tune_sigmas(
    model: &RgprModel,
    val_data: &LabeledDataset,
    cfg: &TuneConfig,
) -> Result<LayeredDscsParams> {
    let mut rng = Rng::new(cfg.seed);
    let outliers = generate_outliers(&cfg.outlier_source, &val_data.inputs, cfg.batch, &mut rng);
    tune_sigmas_with_outliers(model, val_data, &outliers, cfg)
}
