//! Gaussian posterior fitting and the linearized Gaussian predictive.
//!
//! The posterior mean is the current (MAP) parameter subset; the precision
//! is the generalized Gauss-Newton matrix `sum_m J_m^T L_m J_m` plus the
//! prior precision, where `L_m` is `diag(p) - p p^T` for softmax outputs
//! and the identity for regression. GGN keeps the precision positive
//! definite where the exact Hessian need not be.
//!
//! Two posterior families are supported: a full covariance over the last
//! layer, and a diagonal covariance over all parameters.

use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, Targets};
use crate::error::{Error, Result};
use crate::network::{forward, grad_logit, softmax, ParamSubset, ReluNet};
use crate::numerics::{dot, inverse_spd, Matrix};

/// Gaussian posterior over a flattened parameter subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPosterior {
    pub subset: ParamSubset,
    pub mean: Vec<f64>,
    pub cov: PosteriorCov,
}

/// Covariance representation of a [`GaussianPosterior`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PosteriorCov {
    /// Full symmetric positive definite covariance.
    Full(Matrix),
    /// Diagonal covariance, entrywise positive.
    Diagonal(Vec<f64>),
}

/// Gaussian over network outputs: mean `m`, covariance `V`, plus the
/// isotropic RGPR addend. The effective covariance is
/// `cov + rgpr_addend * I`; the addend is zero for un-augmented
/// predictives.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveGaussian {
    pub mean: Vec<f64>,
    pub cov: Matrix,
    pub rgpr_addend: f64,
}

impl PredictiveGaussian {
    /// Effective per-class variance `cov[c,c] + rgpr_addend`.
    pub fn variance(&self, class: usize) -> f64 {
        self.cov[(class, class)] + self.rgpr_addend
    }
}

/// Output-distribution curvature for one data point.
fn curvature(logits: &[f64], targets: &Targets) -> Matrix {
    match targets {
        Targets::Classes(_) => {
            let p = softmax(logits);
            let c = p.len();
            Matrix::from_fn(c, c, |i, j| {
                if i == j {
                    p[i] * (1.0 - p[i])
                } else {
                    -p[i] * p[j]
                }
            })
        }
        Targets::Values(_) => Matrix::identity(logits.len()),
    }
}

/// Fits a Laplace posterior: mean = current flattened subset parameters,
/// precision = GGN + `prior_precision * I`. The covariance is the inverse
/// precision (full, last layer) or the reciprocal of its diagonal
/// (diagonal, all parameters).
pub fn fit_laplace(
    net: &ReluNet,
    data: &LabeledDataset,
    prior_precision: f64,
    subset: ParamSubset,
) -> Result<GaussianPosterior> {
    assert!(prior_precision > 0.0, "prior precision must be positive");
    let p = net.subset_len(subset);
    let c = net.output_dim();
    let mean = net.flatten_subset(subset);
    match subset {
        ParamSubset::LastLayer => {
            let mut precision = Matrix::zeros(p, p);
            for m in 0..data.len() {
                let x = data.input(m);
                let trace = forward(net, x)?;
                let lam = curvature(&trace.logits, &data.targets);
                let jac: Vec<Vec<f64>> = (0..c)
                    .map(|cls| grad_logit(net, x, cls, subset))
                    .collect::<Result<_>>()?;
                // J^T L J, exploiting symmetry.
                for a in 0..c {
                    for b in 0..c {
                        let l_ab = lam[(a, b)];
                        if l_ab == 0.0 {
                            continue;
                        }
                        for i in 0..p {
                            let ji = jac[a][i];
                            if ji == 0.0 {
                                continue;
                            }
                            let row = precision.row_mut(i);
                            for (k, jk) in jac[b].iter().enumerate() {
                                row[k] += l_ab * ji * jk;
                            }
                        }
                    }
                }
            }
            precision.add_diagonal(prior_precision);
            let cov = inverse_spd(&precision)?;
            Ok(GaussianPosterior {
                subset,
                mean,
                cov: PosteriorCov::Full(cov),
            })
        }
        ParamSubset::All => {
            let mut diag = vec![prior_precision; p];
            for m in 0..data.len() {
                let x = data.input(m);
                let trace = forward(net, x)?;
                let lam = curvature(&trace.logits, &data.targets);
                let jac: Vec<Vec<f64>> = (0..c)
                    .map(|cls| grad_logit(net, x, cls, subset))
                    .collect::<Result<_>>()?;
                for a in 0..c {
                    for b in 0..c {
                        let l_ab = lam[(a, b)];
                        if l_ab == 0.0 {
                            continue;
                        }
                        for i in 0..p {
                            diag[i] += l_ab * jac[a][i] * jac[b][i];
                        }
                    }
                }
            }
            let variances: Vec<f64> = diag.into_iter().map(|d| 1.0 / d).collect();
            Ok(GaussianPosterior {
                subset,
                mean,
                cov: PosteriorCov::Diagonal(variances),
            })
        }
    }
}

/// Linearized Gaussian predictive at a test point: mean = logits at the
/// posterior mean, covariance = `J Sigma J^T` over the parameter subset.
pub fn linearized_predictive(
    net: &ReluNet,
    post: &GaussianPosterior,
    x: &[f64],
) -> Result<PredictiveGaussian> {
    let p = net.subset_len(post.subset);
    if post.mean.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "posterior over {} parameters vs network subset of {}",
            post.mean.len(),
            p
        )));
    }
    let c = net.output_dim();
    let trace = forward(net, x)?;
    let jac: Vec<Vec<f64>> = (0..c)
        .map(|cls| grad_logit(net, x, cls, post.subset))
        .collect::<Result<_>>()?;
    let cov = match &post.cov {
        PosteriorCov::Full(sigma) => {
            if sigma.rows() != p {
                return Err(Error::DimensionMismatch(format!(
                    "covariance {}x{} vs subset length {}",
                    sigma.rows(),
                    sigma.cols(),
                    p
                )));
            }
            let sigma_j: Vec<Vec<f64>> = jac.iter().map(|j| sigma.matvec(j)).collect();
            Matrix::from_fn(c, c, |a, b| dot(&jac[a], &sigma_j[b]))
        }
        PosteriorCov::Diagonal(d) => {
            if d.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal covariance length {} vs subset length {}",
                    d.len(),
                    p
                )));
            }
            Matrix::from_fn(c, c, |a, b| {
                (0..p).map(|i| jac[a][i] * d[i] * jac[b][i]).sum()
            })
        }
    };
    Ok(PredictiveGaussian {
        mean: trace.logits,
        cov,
        rgpr_addend: 0.0,
    })
}

/// Generalized probit approximation of the softmax-Gaussian integral:
/// `softmax(m_i * kappa_i)` with `kappa_i = (1 + pi/8 * v_ii)^(-1/2)` and
/// `v_ii` the effective per-class variance.
pub fn probit_predict(pred: &PredictiveGaussian) -> Vec<f64> {
    let c = pred.mean.len();
    let scaled: Vec<f64> = (0..c)
        .map(|i| {
            let v = pred.variance(i);
            let kappa = (1.0 + std::f64::consts::PI / 8.0 * v).powf(-0.5);
            pred.mean[i] * kappa
        })
        .collect();
    softmax(&scaled)
}

#[cfg(test)]
mod tests {
    use rand::RngCore;

    use super::*;
    use crate::data::LabeledDataset;
    use crate::numerics::Rng;

    fn empty_classification(n_dims: usize) -> LabeledDataset {
        LabeledDataset::new(Matrix::zeros(0, n_dims), Targets::Classes(vec![]))
    }

    #[test]
    fn zero_data_gives_prior_covariance() {
        let mut rng = Rng::new(0);
        let net = ReluNet::init(&[2, 3, 2], &mut rng);
        let lambda = 4.0;
        let post = fit_laplace(
            &net,
            &empty_classification(2),
            lambda,
            ParamSubset::LastLayer,
        )
        .unwrap();
        let PosteriorCov::Full(cov) = &post.cov else {
            panic!("expected full covariance")
        };
        for i in 0..cov.rows() {
            for j in 0..cov.cols() {
                let expect = if i == j { 1.0 / lambda } else { 0.0 };
                assert!((cov[(i, j)] - expect).abs() < 1e-12);
            }
        }
        let diag_post =
            fit_laplace(&net, &empty_classification(2), lambda, ParamSubset::All).unwrap();
        let PosteriorCov::Diagonal(d) = &diag_post.cov else {
            panic!("expected diagonal covariance")
        };
        assert!(d.iter().all(|v| (*v - 1.0 / lambda).abs() < 1e-12));
    }

    #[test]
    fn huge_prior_precision_collapses_covariance() {
        let mut rng = Rng::new(1);
        let data = crate::data::two_moons(50, 0.1, &mut rng);
        let net = ReluNet::init(&[2, 4, 2], &mut rng);
        let post = fit_laplace(&net, &data, 1e8, ParamSubset::LastLayer).unwrap();
        let PosteriorCov::Full(cov) = &post.cov else {
            panic!("expected full covariance")
        };
        let dim = cov.rows() as f64;
        assert!(cov.max_abs() <= 1e-7 * dim);
    }

    #[test]
    fn posterior_mean_is_current_subset() {
        let mut rng = Rng::new(2);
        let net = ReluNet::init(&[2, 3, 2], &mut rng);
        let post = fit_laplace(&net, &empty_classification(2), 1.0, ParamSubset::All).unwrap();
        assert_eq!(post.mean, net.flatten_subset(ParamSubset::All));
    }

    #[test]
    fn predictive_with_zero_covariance_is_map() {
        let mut rng = Rng::new(3);
        let net = ReluNet::init(&[2, 4, 3], &mut rng);
        let p = net.subset_len(ParamSubset::LastLayer);
        let post = GaussianPosterior {
            subset: ParamSubset::LastLayer,
            mean: net.flatten_subset(ParamSubset::LastLayer),
            cov: PosteriorCov::Full(Matrix::zeros(p, p)),
        };
        let x = [0.2, -0.5];
        let pred = linearized_predictive(&net, &post, &x).unwrap();
        assert_eq!(pred.mean, forward(&net, &x).unwrap().logits);
        assert_eq!(pred.cov.max_abs(), 0.0);
        assert_eq!(pred.rgpr_addend, 0.0);
    }

    #[test]
    fn identity_covariance_gives_block_structure() {
        // With Sigma = I the last-layer predictive covariance is
        // (|h|^2 + 1) I: class rows of the Jacobian are disjoint.
        let mut rng = Rng::new(4);
        let net = ReluNet::init(&[2, 5, 3], &mut rng);
        let p = net.subset_len(ParamSubset::LastLayer);
        let post = GaussianPosterior {
            subset: ParamSubset::LastLayer,
            mean: net.flatten_subset(ParamSubset::LastLayer),
            cov: PosteriorCov::Full(Matrix::identity(p)),
        };
        let x = [0.7, 0.1];
        let h = &forward(&net, &x).unwrap().activations[1];
        let expected = dot(h, h) + 1.0;
        let pred = linearized_predictive(&net, &post, &x).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { expected } else { 0.0 };
                assert!((pred.cov[(a, b)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn predictive_covariance_is_symmetric_psd_shaped() {
        let mut rng = Rng::new(5);
        let data = crate::data::two_moons(30, 0.1, &mut rng);
        let net = ReluNet::init(&[2, 6, 2], &mut rng);
        let post = fit_laplace(&net, &data, 0.5, ParamSubset::LastLayer).unwrap();
        let pred = linearized_predictive(&net, &post, &[0.3, 0.3]).unwrap();
        assert!((pred.cov[(0, 1)] - pred.cov[(1, 0)]).abs() < 1e-12);
        assert!(pred.cov[(0, 0)] >= 0.0 && pred.cov[(1, 1)] >= 0.0);
        // 2x2 PSD: determinant nonnegative.
        let det = pred.cov[(0, 0)] * pred.cov[(1, 1)] - pred.cov[(0, 1)] * pred.cov[(1, 0)];
        assert!(det >= -1e-12);
    }

    #[test]
    fn probit_zero_variance_is_softmax() {
        let pred = PredictiveGaussian {
            mean: vec![1.0, -0.5, 0.2],
            cov: Matrix::zeros(3, 3),
            rgpr_addend: 0.0,
        };
        let p = probit_predict(&pred);
        let s = softmax(&pred.mean);
        for (a, b) in p.iter().zip(&s) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn probit_matches_hand_computed_binary_case() {
        // v = 8/pi on both classes makes kappa = 1/sqrt(2).
        let v = 8.0 / std::f64::consts::PI;
        let pred = PredictiveGaussian {
            mean: vec![2.0, 0.0],
            cov: Matrix::from_rows(&[vec![v, 0.0], vec![0.0, v]]),
            rgpr_addend: 0.0,
        };
        let p = probit_predict(&pred);
        assert!((p[0] - 0.8044).abs() < 5e-4, "p0 = {}", p[0]);
        assert!((p[1] - 0.1956).abs() < 5e-4, "p1 = {}", p[1]);
    }

    #[test]
    fn probit_huge_variance_is_uniform() {
        for c in [2usize, 4] {
            let mean: Vec<f64> = (0..c).map(|i| i as f64 / 2.0).collect();
            let pred = PredictiveGaussian {
                mean,
                cov: Matrix::zeros(c, c),
                rgpr_addend: 1e12,
            };
            let p = probit_predict(&pred);
            for pi in &p {
                assert!((pi - 1.0 / c as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn probit_output_is_a_distribution() {
        let mut rng = Rng::new(6);
        for _ in 0..20 {
            let c = 2 + (rng.next_u64() % 5) as usize;
            let mean: Vec<f64> = (0..c).map(|_| 3.0 * rng.standard_normal()).collect();
            let diag: Vec<f64> = (0..c).map(|_| rng.uniform() * 10.0).collect();
            let pred = PredictiveGaussian {
                mean,
                cov: Matrix::from_fn(c, c, |i, j| if i == j { diag[i] } else { 0.0 }),
                rgpr_addend: rng.uniform(),
            };
            let p = probit_predict(&pred);
            assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
