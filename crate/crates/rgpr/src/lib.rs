//! ReLU-GP residual (RGPR) uncertainty calibration for small ReLU networks.
//!
//! The crate trains MAP feed-forward ReLU networks, fits Gaussian (Laplace)
//! posteriors over a parameter subset, and augments the linearized Gaussian
//! predictive with an additive zero-mean GP prior whose covariance is the
//! double-sided cubic spline (DSCS) kernel evaluated on the input and hidden
//! representations of the network. Far away from the training data the DSCS
//! term grows cubically in the input scale, which drives the predictive
//! distribution of a classifier to the uniform distribution while leaving
//! the predictive mean untouched.
//!
//! Modules:
//! - [`numerics`]: dense row-major matrices, Cholesky with jitter, seeded RNG,
//!   Gaussian sampling.
//! - [`kernels`]: the generalized ReLU feature map, its finite-feature
//!   covariance, and the cubic-spline / DSCS kernel family.
//! - [`network`]: ReLU MLP with activation recording, analytic backprop and
//!   Adam MAP training.
//! - [`laplace`]: Gaussian posteriors (last-layer full / all-layer diagonal),
//!   the linearized predictive and the generalized probit approximation.
//! - [`rgpr`]: the RGPR augmentation and Monte Carlo prediction.
//! - [`baseline_gp`]: the Blight-Ott residual GP baseline with exact
//!   posterior formulas.
//! - [`metrics`]: MMC, AUROC, Brier score, entropy, accuracy.
//! - [`tuning`]: inlier/outlier entropy objective for the per-layer kernel
//!   variances.
//! - [`data`]: synthetic dataset generators, standardization and scaled
//!   outlier construction.
//! - [`persist`]: versioned JSON artifact container for models, posteriors
//!   and kernel variances.

pub mod baseline_gp;
pub mod data;
pub mod error;
pub mod kernels;
pub mod laplace;
pub mod metrics;
pub mod network;
pub mod numerics;
pub mod persist;
pub mod rgpr;
pub mod tuning;

pub use error::{Error, Result};
