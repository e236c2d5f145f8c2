//! The generalized ReLU feature map, its finite-feature covariance, and the
//! cubic-spline / double-sided cubic spline (DSCS) kernel family.
//!
//! A Bayesian linear model over `d` regularly spaced shifted-ReLU features
//! on `[c_min, c_max]` has output covariance [`cov_finite`]. As the number
//! of features goes to infinity this Riemann sum converges to the closed
//! form [`cubic_spline_1d`]. Setting `c_min = 0` and mirroring the
//! construction to the negative axis gives the DSCS kernel, which covers
//! the whole real line, vanishes around the origin, and is cubic in the
//! input scale: `dscs_1d(a*x, a*x) = a^3 * dscs_1d(x, x)` for `a > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the one-sided cubic spline kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cubic1dParams {
    /// Lower bound of the feature kinks.
    pub c_min: f64,
    /// Prior variance scale of the feature weights.
    pub sigma2: f64,
}

impl Cubic1dParams {
    pub fn new(c_min: f64, sigma2: f64) -> Result<Self> {
        if sigma2.is_nan() || sigma2 < 0.0 {
            return Err(Error::InvalidRange(format!(
                "sigma2 must be >= 0, got {sigma2}"
            )));
        }
        Ok(Cubic1dParams { c_min, sigma2 })
    }
}

/// Parameters of the double-sided cubic spline kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DscsParams {
    pub sigma2: f64,
}

impl DscsParams {
    pub fn new(sigma2: f64) -> Result<Self> {
        if sigma2.is_nan() || sigma2 < 0.0 {
            return Err(Error::InvalidRange(format!(
                "sigma2 must be >= 0, got {sigma2}"
            )));
        }
        Ok(DscsParams { sigma2 })
    }
}

/// Per-layer variances of the layered additive DSCS kernel.
///
/// Entry `l` scales the kernel on the `l`-th representation space of the
/// paired network; the input counts as layer 0. A zero entry disables a
/// layer, which is how an input-only kernel is expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredDscsParams {
    pub sigma2_per_layer: Vec<f64>,
}

impl LayeredDscsParams {
    pub fn new(sigma2_per_layer: Vec<f64>) -> Result<Self> {
        if sigma2_per_layer.is_empty() {
            return Err(Error::EmptyInput("sigma2_per_layer".into()));
        }
        if let Some(bad) = sigma2_per_layer.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::InvalidRange(format!(
                "per-layer sigma2 must be >= 0, got {bad}"
            )));
        }
        Ok(LayeredDscsParams { sigma2_per_layer })
    }

    /// `sigma2 = value` for every one of `layers` layers.
    pub fn constant(layers: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; layers])
    }

    /// `sigma2_0 = value`, all deeper layers disabled.
    pub fn input_only(layers: usize, value: f64) -> Result<Self> {
        if layers == 0 {
            return Err(Error::EmptyInput("sigma2_per_layer".into()));
        }
        let mut v = vec![0.0; layers];
        v[0] = value;
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.sigma2_per_layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma2_per_layer.is_empty()
    }
}

/// Shifted ReLU `max(0, z - c)` with the kink at `c`.
#[inline]
pub fn relu_feature(z: f64, c: f64) -> f64 {
    (z - c).max(0.0)
}

/// Output covariance of a Bayesian linear model over `d` regularly spaced
/// ReLU features on `[c_min, c_max]`:
///
/// `sigma2 * (c_max - c_min) / d * sum_i ReLU(x; c_i) * ReLU(x'; c_i)`
///
/// with `c_i = c_min + (i - 1) / (d - 1) * (c_max - c_min)`. This is the
/// Riemann sum whose `d -> inf` limit is [`cubic_spline_1d`]; it is kept
/// with finite `c_max` solely as the convergence oracle.
pub fn cov_finite(
    x: f64,
    x_prime: f64,
    d: usize,
    c_min: f64,
    c_max: f64,
    sigma2: f64,
) -> Result<f64> {
    if c_min >= c_max {
        return Err(Error::InvalidRange(format!(
            "c_min {c_min} must be < c_max {c_max}"
        )));
    }
    assert!(d >= 2, "need at least two features");
    let width = c_max - c_min;
    let step = width / (d - 1) as f64;
    let mut sum = 0.0;
    for i in 0..d {
        let c = c_min + i as f64 * step;
        let f = relu_feature(x, c) * relu_feature(x_prime, c);
        if f == 0.0 && x.min(x_prime) <= c {
            // All remaining kinks are to the right of both points.
            break;
        }
        sum += f;
    }
    Ok(sigma2 * width / d as f64 * sum)
}

/// Closed-form cubic spline kernel, the `d -> inf`, `c_max -> inf` limit of
/// [`cov_finite`]. With `m = min(x, x')`:
///
/// `0` if `m <= c_min`, else
/// `sigma2 * (1/3 (m^3 - c_min^3) - 1/2 (m^2 - c_min^2)(x + x') + (m - c_min) x x')`.
///
/// The Heaviside convention is `H(0) = 0`, so the kernel is exactly zero at
/// `m = c_min`.
pub fn cubic_spline_1d(x: f64, x_prime: f64, p: Cubic1dParams) -> f64 {
    let m = x.min(x_prime);
    if m <= p.c_min {
        return 0.0;
    }
    let c = p.c_min;
    // Grouping the symmetric subexpressions keeps the kernel bit-exactly
    // symmetric in (x, x').
    let sum = x + x_prime;
    let prod = x * x_prime;
    p.sigma2
        * ((m.powi(3) - c.powi(3)) / 3.0 - 0.5 * (m.powi(2) - c.powi(2)) * sum + (m - c) * prod)
}

/// Double-sided cubic spline kernel on the real line: the sum of the
/// right-pointing one-sided kernel and its mirror image. Zero whenever the
/// arguments have opposite signs or either is zero.
pub fn dscs_1d(x: f64, x_prime: f64, p: DscsParams) -> f64 {
    let one_sided = Cubic1dParams {
        c_min: 0.0,
        sigma2: p.sigma2,
    };
    cubic_spline_1d(x, x_prime, one_sided) + cubic_spline_1d(-x, -x_prime, one_sided)
}

/// Multivariate DSCS kernel: the dimension-wise average
/// `1/n * sum_i dscs_1d(x_i, x'_i)`.
///
/// A sum (not a product) so the kernel is non-zero wherever at least one
/// coordinate is away from the origin.
pub fn dscs_multi(x: &[f64], x_prime: &[f64], p: DscsParams) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch(format!(
            "dscs_multi: {} vs {}",
            x.len(),
            x_prime.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::DimensionMismatch("dscs_multi: empty input".into()));
    }
    let sum: f64 = x.iter().zip(x_prime).map(|(a, b)| dscs_1d(*a, *b, p)).sum();
    Ok(sum / x.len() as f64)
}

/// Marginal variance of the layered additive DSCS prior at the given stack
/// of representations: `sum_l dscs_multi(h_l, h_l; sigma2_l)`.
pub fn layered_dscs_var(activations: &[Vec<f64>], p: &LayeredDscsParams) -> Result<f64> {
    if activations.len() != p.sigma2_per_layer.len() {
        return Err(Error::DimensionMismatch(format!(
            "layered_dscs_var: {} activation layers vs {} variances",
            activations.len(),
            p.sigma2_per_layer.len()
        )));
    }
    let mut total = 0.0;
    for (h, sigma2) in activations.iter().zip(&p.sigma2_per_layer) {
        if *sigma2 == 0.0 {
            continue;
        }
        total += dscs_multi(h, h, DscsParams { sigma2: *sigma2 })?;
    }
    Ok(total)
}
