//! Blight-Ott (BNO) residual baseline: a GP posterior over
//! `f_tilde = g(x)^T theta + fhat` with the DSCS kernel on the inputs,
//! for 1-D / low-dimensional regression comparison.
//!
//! The parametric part uses an explicit feature map `g` (network
//! last-hidden activations plus a constant, or any custom map) with a
//! Gaussian prior `N(0, B)` on its weights; the residual `fhat` carries a
//! zero-mean GP prior with the DSCS kernel. Posterior mean and variance at
//! a test point, with `K_reg = K + noise_var * I` over the training
//! inputs, `mu = (B^-1 + G K_reg^-1 G^T)^-1 G K_reg^-1 y` and
//! `r = g(x*) - G K_reg^-1 k*`:
//!
//! `mean = g(x*)^T mu + k*^T K_reg^-1 (y - G^T mu)`
//! `var  = k(x*,x*) + k*^T K_reg^-1 k* + r^T (B^-1 + G K_reg^-1 G^T)^-1 r`
//!
//! Unlike RGPR this performs actual inference against the training set,
//! at `O(M^3)` fitting cost.

use crate::error::{Error, Result};
use crate::kernels::{dscs_multi, DscsParams};
use crate::network::{forward, ReluNet};
use crate::numerics::{cholesky, dot, inverse_spd, solve_with_cholesky, Matrix};

/// Feature map of the parametric part.
pub type FeatureFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Residual-GP regression model specification.
pub struct GpResidualModel {
    pub feature_fn: FeatureFn,
    /// Prior covariance of the feature weights.
    pub prior_cov_b: Matrix,
    pub kernel: DscsParams,
    /// Regularizing noise variance added to the kernel matrix diagonal.
    pub noise_var: f64,
    pub train_inputs: Matrix,
    pub train_targets: Vec<f64>,
}

impl GpResidualModel {
    /// Feature map from a trained network: last hidden activations plus a
    /// constant 1, i.e. the linearization of the network output in its
    /// last-layer parameters.
    pub fn network_features(net: ReluNet) -> FeatureFn {
        Box::new(move |x: &[f64]| {
            let trace = forward(&net, x).expect("input dim matches network");
            let mut g = trace.activations.last().unwrap().clone();
            g.push(1.0);
            g
        })
    }

    /// Fits the model; fails if the regularized kernel matrix or the
    /// feature-space system is not positive definite.
    pub fn fit(&self) -> Result<BnoPosterior<'_>> {
        let m = self.train_inputs.rows();
        if m == 0 {
            return Err(Error::EmptyInput("bno fit needs training data".into()));
        }
        if self.train_targets.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "bno: {} inputs vs {} targets",
                m,
                self.train_targets.len()
            )));
        }
        assert!(self.noise_var > 0.0, "noise_var must be positive");
        // Regularized kernel matrix over the training inputs.
        let mut k_reg = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dscs_multi(
                    self.train_inputs.row(i),
                    self.train_inputs.row(j),
                    self.kernel,
                )?;
                k_reg[(i, j)] = v;
                k_reg[(j, i)] = v;
            }
        }
        k_reg.add_diagonal(self.noise_var);
        let l_k = cholesky(&k_reg)?;
        // Feature matrix G: column i is g(x_i).
        let g0 = (self.feature_fn)(self.train_inputs.row(0));
        let p = g0.len();
        let mut g = Matrix::zeros(p, m);
        for i in 0..m {
            let gi = if i == 0 {
                g0.clone()
            } else {
                (self.feature_fn)(self.train_inputs.row(i))
            };
            if gi.len() != p {
                return Err(Error::DimensionMismatch(
                    "feature map returns inconsistent lengths".into(),
                ));
            }
            for (row, v) in gi.iter().enumerate() {
                g[(row, i)] = *v;
            }
        }
        if self.prior_cov_b.rows() != p {
            return Err(Error::DimensionMismatch(format!(
                "prior covariance is {}x{} but features have length {}",
                self.prior_cov_b.rows(),
                self.prior_cov_b.cols(),
                p
            )));
        }
        // K_reg^-1 G^T, one solve per feature.
        let mut kinv_gt = Matrix::zeros(m, p);
        for j in 0..p {
            let col: Vec<f64> = (0..m).map(|i| g[(j, i)]).collect();
            let sol = solve_with_cholesky(&l_k, &col);
            for i in 0..m {
                kinv_gt[(i, j)] = sol[i];
            }
        }
        // A = B^-1 + G K_reg^-1 G^T.
        let b_inv = inverse_spd(&self.prior_cov_b)?;
        let mut a = g.matmul(&kinv_gt);
        for i in 0..p {
            for j in 0..p {
                a[(i, j)] += b_inv[(i, j)];
            }
        }
        // Symmetrize against rounding before factorizing.
        for i in 0..p {
            for j in (i + 1)..p {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let l_a = cholesky(&a)?;
        let kinv_y = solve_with_cholesky(&l_k, &self.train_targets);
        let g_kinv_y = g.matvec(&kinv_y);
        let mu = solve_with_cholesky(&l_a, &g_kinv_y);
        // Residual of the parametric fit at the training points.
        let gt_mu: Vec<f64> = (0..m)
            .map(|i| (0..p).map(|j| g[(j, i)] * mu[j]).sum())
            .collect();
        let resid: Vec<f64> = self
            .train_targets
            .iter()
            .zip(&gt_mu)
            .map(|(y, f)| y - f)
            .collect();
        let kinv_resid = solve_with_cholesky(&l_k, &resid);
        Ok(BnoPosterior {
            model: self,
            l_k,
            l_a,
            g,
            mu,
            kinv_resid,
        })
    }
}

/// Fitted BNO posterior; borrows the model it was fitted from.
pub struct BnoPosterior<'a> {
    model: &'a GpResidualModel,
    l_k: Matrix,
    l_a: Matrix,
    /// Feature matrix, column per training point.
    g: Matrix,
    /// Posterior mean of the feature weights.
    mu: Vec<f64>,
    kinv_resid: Vec<f64>,
}

impl BnoPosterior<'_> {
    /// Posterior mean of the feature weights.
    pub fn weight_mean(&self) -> &[f64] {
        &self.mu
    }

    /// Posterior mean and variance of `f_tilde(x_star)`.
    pub fn predict(&self, x_star: &[f64]) -> Result<(f64, f64)> {
        let m = self.model.train_inputs.rows();
        let g_star = (self.model.feature_fn)(x_star);
        let mut k_star = vec![0.0; m];
        for i in 0..m {
            k_star[i] = dscs_multi(x_star, self.model.train_inputs.row(i), self.model.kernel)?;
        }
        let k_star_star = dscs_multi(x_star, x_star, self.model.kernel)?;
        let mean = dot(&g_star, &self.mu) + dot(&k_star, &self.kinv_resid);
        let kk = solve_with_cholesky(&self.l_k, &k_star);
        let r: Vec<f64> = (0..g_star.len())
            .map(|j| {
                let gk: f64 = (0..m).map(|i| self.g[(j, i)] * kk[i]).sum();
                g_star[j] - gk
            })
            .collect();
        let ra = solve_with_cholesky(&self.l_a, &r);
        let var = k_star_star + dot(&k_star, &kk) + dot(&r, &ra);
        Ok((mean, var))
    }
}

/// One-shot fit-and-predict.
pub fn bno_fit_predict(model: &GpResidualModel, x_star: &[f64]) -> Result<(f64, f64)> {
    model.fit()?.predict(x_star)
}
