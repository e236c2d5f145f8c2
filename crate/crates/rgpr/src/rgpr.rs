//! RGPR augmentation: attach the layered DSCS prior variance to a
//! linearized predictive and run Monte Carlo prediction.
//!
//! The augmentation adds `layered_dscs_var(h, kernel) * I` to the
//! predictive covariance and leaves the mean untouched, so predictions are
//! invariant while the output variance picks up a term that grows
//! cubically in the input scale. No posterior inference over the residual
//! process is ever performed; the GP enters purely as a prior.

use crate::error::{Error, Result};
use crate::kernels::{layered_dscs_var, LayeredDscsParams};
use crate::laplace::{linearized_predictive, GaussianPosterior, PosteriorCov, PredictiveGaussian};
use crate::network::{forward, softmax, ReluNet};
use crate::numerics::{cholesky, sample_with_cholesky, Matrix, Rng};

/// A pre-trained network, its Gaussian posterior, and the per-layer kernel
/// variances of the residual prior.
#[derive(Debug, Clone)]
pub struct RgprModel {
    pub net: ReluNet,
    pub post: GaussianPosterior,
    pub kernel: LayeredDscsParams,
}

impl RgprModel {
    /// The kernel must provide one variance per representation space of
    /// the network (input plus hidden layers).
    pub fn new(net: ReluNet, post: GaussianPosterior, kernel: LayeredDscsParams) -> Result<Self> {
        if kernel.len() != net.n_representations() {
            return Err(Error::DimensionMismatch(format!(
                "kernel has {} variances but network has {} representation spaces",
                kernel.len(),
                net.n_representations()
            )));
        }
        Ok(RgprModel { net, post, kernel })
    }
}

/// Linearized predictive with the RGPR variance addend. The mean is the
/// un-augmented predictive mean, unchanged.
pub fn rgpr_predictive(model: &RgprModel, x: &[f64]) -> Result<PredictiveGaussian> {
    let mut pred = linearized_predictive(&model.net, &model.post, x)?;
    let trace = forward(&model.net, x)?;
    pred.rgpr_addend = layered_dscs_var(&trace.activations, &model.kernel)?;
    Ok(pred)
}

/// Monte Carlo class prediction: averages `softmax(f(x; theta_s) + fhat_s)`
/// over `s` posterior draws, where `fhat_s ~ N(0, v_s(x) I)` and `v_s` is
/// the layered DSCS variance at the activations of the sampled network.
///
/// Last-layer posteriors sample the last-layer parameters; diagonal
/// posteriors sample all of them.
pub fn mc_predict(model: &RgprModel, x: &[f64], s: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    assert!(s >= 1, "mc_predict needs at least one sample");
    let c = model.net.output_dim();
    // Decompose the posterior covariance once.
    enum Sampler {
        Chol(Matrix),
        Diag(Vec<f64>),
    }
    let sampler = match &model.post.cov {
        PosteriorCov::Full(sigma) => {
            if sigma.max_abs() == 0.0 {
                Sampler::Diag(vec![0.0; model.post.mean.len()])
            } else {
                Sampler::Chol(cholesky(sigma)?)
            }
        }
        PosteriorCov::Diagonal(d) => Sampler::Diag(d.iter().map(|v| v.sqrt()).collect()),
    };
    let mut work = model.net.clone();
    let mut acc = vec![0.0; c];
    let p = model.post.mean.len();
    let mut z = vec![0.0; p];
    for _ in 0..s {
        for zi in z.iter_mut() {
            *zi = rng.standard_normal();
        }
        let theta = match &sampler {
            Sampler::Chol(l) => sample_with_cholesky(&model.post.mean, l, &z),
            Sampler::Diag(sd) => model
                .post
                .mean
                .iter()
                .zip(sd.iter().zip(&z))
                .map(|(m, (s, zi))| m + s * zi)
                .collect(),
        };
        work.unflatten_subset(model.post.subset, &theta);
        let trace = forward(&work, x)?;
        let v = layered_dscs_var(&trace.activations, &model.kernel)?;
        let sd = v.sqrt();
        let f_tilde: Vec<f64> = trace
            .logits
            .iter()
            .map(|l| l + sd * rng.standard_normal())
            .collect();
        for (a, pi) in acc.iter_mut().zip(softmax(&f_tilde)) {
            *a += pi;
        }
    }
    for a in acc.iter_mut() {
        *a /= s as f64;
    }
    Ok(acc)
}

/// Maximum class probability.
pub fn confidence(p: &[f64]) -> f64 {
    p.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}
