//! Shared fixtures for the integration tests: trained models, synthetic
//! multi-class blobs, and a small symmetric eigensolver used as an
//! independent PSD oracle.

#![allow(dead_code)]

use rgpr::data::{LabeledDataset, Targets};
use rgpr::kernels::LayeredDscsParams;
use rgpr::laplace::fit_laplace;
use rgpr::network::{train_map, ParamSubset, ReluNet, TrainConfig};
use rgpr::numerics::{Matrix, Rng};
use rgpr::rgpr::RgprModel;

/// Standardized two-moons training set.
pub fn moons_train(m: usize, seed: u64) -> LabeledDataset {
    let mut rng = Rng::new(seed);
    let mut data = rgpr::data::two_moons(m, 0.1, &mut rng);
    data.standardize();
    data
}

/// Weight decay of the trained fixtures; keeps MAP logit slopes moderate
/// so the probit asymptotics are visible at finite alpha.
pub const MOONS_TRAIN_PRECISION: f64 = 1.0;

/// Laplace prior precision of the trained fixtures; concentrates the
/// parameter posterior so the alpha^2 term of the predictive variance is
/// dominated by the kernel term from alpha = 100 on.
pub const MOONS_FIT_PRECISION: f64 = 10.0;

/// Two-moons net trained to >= 95% accuracy with a last-layer Laplace
/// posterior and the default all-ones kernel.
pub fn trained_moons_model(seed: u64) -> (RgprModel, LabeledDataset) {
    let data = moons_train(500, seed);
    let cfg = TrainConfig {
        prior_precision: MOONS_TRAIN_PRECISION,
        learning_rate: 5e-3,
        epochs: 200,
        batch_size: 32,
        seed,
    };
    let mut rng = Rng::new(seed).substream(1);
    let net = train_map(&data, &cfg, &[2, 20, 20, 2], &mut rng).unwrap();
    let post = fit_laplace(&net, &data, MOONS_FIT_PRECISION, ParamSubset::LastLayer).unwrap();
    let kernel = LayeredDscsParams::constant(net.n_representations(), 1.0).unwrap();
    (RgprModel::new(net, post, kernel).unwrap(), data)
}

/// Standardized isotropic Gaussian blobs on a circle, one per class.
pub fn gaussian_blobs(m: usize, n_classes: usize, seed: u64) -> LabeledDataset {
    let mut rng = Rng::new(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let c = i % n_classes;
        let angle = 2.0 * std::f64::consts::PI * c as f64 / n_classes as f64;
        rows.push(vec![
            3.0 * angle.cos() + 0.5 * rng.standard_normal(),
            3.0 * angle.sin() + 0.5 * rng.standard_normal(),
        ]);
        labels.push(c);
    }
    let mut data = LabeledDataset::new(Matrix::from_rows(&rows), Targets::Classes(labels));
    data.standardize();
    data
}

/// Blob classifier with a last-layer Laplace posterior.
pub fn trained_blob_model(n_classes: usize, seed: u64) -> (RgprModel, LabeledDataset) {
    let data = gaussian_blobs(60 * n_classes, n_classes, seed);
    let cfg = TrainConfig {
        prior_precision: 1e-2,
        learning_rate: 5e-3,
        epochs: 150,
        batch_size: 32,
        seed,
    };
    let mut rng = Rng::new(seed).substream(1);
    let net = train_map(&data, &cfg, &[2, 20, 20, n_classes], &mut rng).unwrap();
    let post = fit_laplace(&net, &data, cfg.prior_precision, ParamSubset::LastLayer).unwrap();
    let kernel = LayeredDscsParams::constant(net.n_representations(), 1.0).unwrap();
    (RgprModel::new(net, post, kernel).unwrap(), data)
}

/// Random-initialized classifier with an isotropic last-layer posterior.
pub fn random_model(n_classes: usize, seed: u64) -> RgprModel {
    let mut rng = Rng::new(seed);
    let net = ReluNet::init(&[2, 20, 20, n_classes], &mut rng);
    let p = net.subset_len(ParamSubset::LastLayer);
    let post = rgpr::laplace::GaussianPosterior {
        subset: ParamSubset::LastLayer,
        mean: net.flatten_subset(ParamSubset::LastLayer),
        cov: rgpr::laplace::PosteriorCov::Full(Matrix::identity(p)),
    };
    let kernel = LayeredDscsParams::constant(net.n_representations(), 1.0).unwrap();
    RgprModel::new(net, post, kernel).unwrap()
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
/// Independent of the crate's Cholesky path; used as a PSD oracle.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}
