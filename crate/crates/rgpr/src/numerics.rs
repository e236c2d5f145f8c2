//! Dense linear algebra and randomness substrate.
//!
//! Everything is `f64` and row-major. The sizes in this crate are small
//! (parameter subsets and kernel matrices of a few hundred rows), so the
//! implementations favor clarity and exact control over the jitter policy
//! rather than raw speed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry precondition of [`cholesky`].
const SYMMETRY_RTOL: f64 = 1e-10;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from a slice of rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Flat row-major view of the data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix-matrix product.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Adds `value` to every diagonal entry.
    pub fn add_diagonal(&mut self, value: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self[(i, i)] += value;
        }
    }

    /// Mean of the diagonal entries.
    pub fn mean_diagonal(&self) -> f64 {
        let n = self.rows.min(self.cols);
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|i| self[(i, i)]).sum::<f64>() / n as f64
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks symmetry within a relative tolerance of the largest entry.
    fn check_symmetric(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let scale = self.max_abs().max(1.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let diff = (self[(i, j)] - self[(j, i)]).abs();
                if diff > SYMMETRY_RTOL * scale {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Dot product of two equally long slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bare Cholesky without jitter; returns the failing pivot on error.
fn cholesky_raw(a: &Matrix) -> std::result::Result<Matrix, (usize, f64)> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err((i, s));
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Cholesky factorization `a = L L^T` of a symmetric positive definite matrix.
///
/// Jitter policy: on failure, `1e-10 * mean(diag)` is added to the diagonal
/// and the factorization is retried up to 3 times with a tenfold escalation.
/// Fails with [`Error::NotPositiveDefinite`] if a pivot is still
/// non-positive afterwards.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    a.check_symmetric()?;
    match cholesky_raw(a) {
        Ok(l) => Ok(l),
        Err(mut failure) => {
            let base = 1e-10 * a.mean_diagonal().abs().max(f64::MIN_POSITIVE);
            let mut jitter = base;
            for _ in 0..3 {
                let mut aj = a.clone();
                aj.add_diagonal(jitter);
                match cholesky_raw(&aj) {
                    Ok(l) => return Ok(l),
                    Err(f) => failure = f,
                }
                jitter *= 10.0;
            }
            Err(Error::NotPositiveDefinite {
                index: failure.0,
                pivot: failure.1,
            })
        }
    }
}

/// Solves `L L^T x = b` given the lower-triangular Cholesky factor.
pub fn solve_with_cholesky(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n, "rhs length mismatch");
    // Forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    // Backward: L^T x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    Ok(solve_with_cholesky(&l, b))
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let l = cholesky(a)?;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = solve_with_cholesky(&l, &e);
        e[j] = 0.0;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    // Symmetrize to wash out the last bits of rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

/// Deterministic seeded random number generator.
///
/// ChaCha12 keyed by a 64-bit seed: identical seeds produce identical draw
/// sequences across runs and platforms of the same build. A generator is
/// single-owner; parallel workloads derive independent streams with
/// [`Rng::substream`] instead of sharing one instance.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for the same seed, keyed by `stream`.
    pub fn substream(&self, stream: u64) -> Rng {
        let mut inner = ChaCha12Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        Rng {
            seed: self.seed,
            inner,
        }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.inner.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Covariance argument for [`sample_gaussian`].
#[derive(Debug, Clone)]
pub enum Cov<'a> {
    /// `scalar * I`.
    Scalar(f64),
    /// Diagonal covariance with the given nonnegative entries.
    Diagonal(&'a [f64]),
    /// Full covariance matrix (admits Cholesky after jitter).
    Full(&'a Matrix),
}

/// Draws one sample from `N(mean, cov)`.
///
/// With a zero covariance the mean is returned exactly. The number of
/// standard-normal draws consumed depends only on `mean.len()`, so streams
/// stay aligned across covariance kinds.
pub fn sample_gaussian(rng: &mut Rng, mean: &[f64], cov: &Cov<'_>) -> Result<Vec<f64>> {
    let n = mean.len();
    let z: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    match cov {
        Cov::Scalar(s) => {
            if *s < 0.0 {
                return Err(Error::InvalidRange(format!(
                    "negative scalar covariance {s}"
                )));
            }
            let sd = s.sqrt();
            Ok(mean.iter().zip(&z).map(|(m, zi)| m + sd * zi).collect())
        }
        Cov::Diagonal(d) => {
            if d.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal covariance length {} vs mean length {}",
                    d.len(),
                    n
                )));
            }
            if let Some(bad) = d.iter().find(|v| **v < 0.0) {
                return Err(Error::InvalidRange(format!(
                    "negative diagonal covariance entry {bad}"
                )));
            }
            Ok((0..n).map(|i| mean[i] + d[i].sqrt() * z[i]).collect())
        }
        Cov::Full(m) => {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "covariance {}x{} vs mean length {}",
                    m.rows(),
                    m.cols(),
                    n
                )));
            }
            let l = cholesky(m)?;
            Ok(sample_with_cholesky(mean, &l, &z))
        }
    }
}

/// `mean + L z` for a precomputed Cholesky factor; used by samplers that
/// draw repeatedly from the same Gaussian.
pub fn sample_with_cholesky(mean: &[f64], l: &Matrix, z: &[f64]) -> Vec<f64> {
    let n = mean.len();
    let mut out = mean.to_vec();
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..=i {
            s += l[(i, k)] * z[k];
        }
        out[i] += s;
    }
    out
}
