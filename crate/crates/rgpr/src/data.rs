//! Synthetic dataset generators, standardization, and scaled outlier
//! construction.
//!
//! All generators are deterministic given the caller-owned [`Rng`]. Inputs
//! are standardized per dimension before training so that the data sits
//! close to the origin, where the DSCS kernel vanishes; the scaled-outlier
//! generators then operate in that standardized space.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Targets of a labeled dataset: integer classes or real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(v) => v.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-dimension affine transform `(x - mean) / std` fitted on a training
/// set. Constant dimensions keep `std = 1` so the transform stays finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Fits means and population standard deviations column-wise.
    pub fn fit(inputs: &Matrix) -> Standardizer {
        let (m, n) = (inputs.rows(), inputs.cols());
        let mut means = vec![0.0; n];
        let mut stds = vec![1.0; n];
        if m == 0 {
            return Standardizer { means, stds };
        }
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..m {
                s += inputs[(i, j)];
            }
            means[j] = s / m as f64;
            let mut ss = 0.0;
            for i in 0..m {
                ss += (inputs[(i, j)] - means[j]).powi(2);
            }
            let sd = (ss / m as f64).sqrt();
            stds[j] = if sd > 0.0 { sd } else { 1.0 };
        }
        Standardizer { means, stds }
    }

    /// Identity transform of the given width.
    pub fn identity(n_dims: usize) -> Standardizer {
        Standardizer {
            means: vec![0.0; n_dims],
            stds: vec![1.0; n_dims],
        }
    }

    pub fn apply_point(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn apply_in_place(&self, inputs: &mut Matrix) {
        for i in 0..inputs.rows() {
            for j in 0..inputs.cols() {
                inputs[(i, j)] = (inputs[(i, j)] - self.means[j]) / self.stds[j];
            }
        }
    }
}

/// Input matrix plus targets, with the standardization metadata that was
/// applied to the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub inputs: Matrix,
    pub targets: Targets,
    pub standardizer: Standardizer,
}

impl LabeledDataset {
    pub fn new(inputs: Matrix, targets: Targets) -> LabeledDataset {
        assert_eq!(
            inputs.rows(),
            targets.len(),
            "inputs/targets length mismatch"
        );
        let n = inputs.cols();
        LabeledDataset {
            inputs,
            targets,
            standardizer: Standardizer::identity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_dims(&self) -> usize {
        self.inputs.cols()
    }

    /// Number of classes (labels are assumed to be `0..C-1`); 1 for
    /// regression targets.
    pub fn n_classes(&self) -> usize {
        match &self.targets {
            Targets::Classes(labels) => labels.iter().copied().max().map_or(1, |c| c + 1),
            Targets::Values(_) => 1,
        }
    }

    pub fn input(&self, i: usize) -> &[f64] {
        self.inputs.row(i)
    }

    /// Standardizes the inputs in place and records the fitted transform.
    /// Composes with any previously applied transform, so standardizing an
    /// already-standardized set is the identity up to rounding.
    pub fn standardize(&mut self) {
        let fitted = Standardizer::fit(&self.inputs);
        fitted.apply_in_place(&mut self.inputs);
        // Compose: overall transform maps raw -> current standardized space.
        let composed_means: Vec<f64> = self
            .standardizer
            .means
            .iter()
            .zip(self.standardizer.stds.iter())
            .zip(fitted.means.iter())
            .map(|((m0, s0), m1)| m0 + m1 * s0)
            .collect();
        let composed_stds: Vec<f64> = self
            .standardizer
            .stds
            .iter()
            .zip(fitted.stds.iter())
            .map(|(s0, s1)| s0 * s1)
            .collect();
        self.standardizer = Standardizer {
            means: composed_means,
            stds: composed_stds,
        };
    }

    /// Splits into (first, second) with `first_len` rows in the first part.
    pub fn split_at(&self, first_len: usize) -> (LabeledDataset, LabeledDataset) {
        let m = self.len();
        assert!(first_len <= m);
        let take = |range: std::ops::Range<usize>| {
            let inputs = Matrix::from_fn(range.len(), self.n_dims(), |i, j| {
                self.inputs[(range.start + i, j)]
            });
            let targets = match &self.targets {
                Targets::Classes(v) => Targets::Classes(v[range.clone()].to_vec()),
                Targets::Values(v) => Targets::Values(v[range.clone()].to_vec()),
            };
            LabeledDataset {
                inputs,
                targets,
                standardizer: self.standardizer.clone(),
            }
        };
        (take(0..first_len), take(first_len..m))
    }
}

/// Two interleaved half-circles with Gaussian jitter and balanced binary
/// labels. `m` must be even and at least 2.
pub fn two_moons(m: usize, noise_std: f64, rng: &mut Rng) -> LabeledDataset {
    assert!(
        m >= 2 && m.is_multiple_of(2),
        "two_moons needs an even m >= 2"
    );
    let half = m / 2;
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for i in 0..m {
        let t = rng.uniform_in(0.0, std::f64::consts::PI);
        let (mut x, mut y, label) = if i < half {
            (t.cos(), t.sin(), 0usize)
        } else {
            (1.0 - t.cos(), 0.5 - t.sin(), 1usize)
        };
        x += noise_std * rng.standard_normal();
        y += noise_std * rng.standard_normal();
        rows.push(vec![x, y]);
        labels.push(label);
    }
    LabeledDataset::new(Matrix::from_rows(&rows), Targets::Classes(labels))
}

/// Interval of the 1-D toy regression inputs.
pub const TOY_REGRESSION_RANGE: (f64, f64) = (-4.0, 4.0);

/// The smooth curve underlying [`toy_regression_1d`]: a sum of two
/// sinusoids, bounded on the sampling interval.
pub fn toy_regression_curve(x: f64) -> f64 {
    x.sin() + 0.3 * (3.0 * x).sin()
}

/// 1-D regression set: inputs uniform on [`TOY_REGRESSION_RANGE`], targets
/// on [`toy_regression_curve`] plus Gaussian noise.
pub fn toy_regression_1d(m: usize, noise_std: f64, rng: &mut Rng) -> LabeledDataset {
    assert!(m >= 2, "toy_regression_1d needs m >= 2");
    let (lo, hi) = TOY_REGRESSION_RANGE;
    let mut rows = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for _ in 0..m {
        let x = rng.uniform_in(lo, hi);
        rows.push(vec![x]);
        values.push(toy_regression_curve(x) + noise_std * rng.standard_normal());
    }
    LabeledDataset::new(Matrix::from_rows(&rows), Targets::Values(values))
}

/// Uniform noise in `[0, 1]^n` scaled by `alpha` and then mapped through
/// the training standardizer. The result lives in the standardized input
/// space of the model the outliers are evaluated against.
pub fn uniform_outliers(
    count: usize,
    n_dims: usize,
    alpha: f64,
    standardizer: &Standardizer,
    rng: &mut Rng,
) -> Matrix {
    let mut out = Matrix::from_fn(count, n_dims, |_, _| rng.uniform());
    for i in 0..count {
        for j in 0..n_dims {
            let raw = alpha * out[(i, j)];
            out[(i, j)] = (raw - standardizer.means[j]) / standardizer.stds[j];
        }
    }
    out
}

/// Standard Gaussian noise scaled by `alpha`, already expressed in the
/// standardized input space (no further transform is applied).
pub fn gaussian_outliers(count: usize, n_dims: usize, alpha: f64, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(count, n_dims, |_, _| alpha * rng.standard_normal())
}

/// `alpha * x`.
pub fn scale_point(x: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// Writes a dataset as CSV with header `x0,...,x{n-1},target`.
pub fn export_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let n = dataset.n_dims();
    let header: Vec<String> = (0..n)
        .map(|j| format!("x{j}"))
        .chain(std::iter::once("target".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..dataset.len() {
        let mut fields: Vec<String> = dataset.input(i).iter().map(|v| format!("{v}")).collect();
        match &dataset.targets {
            Targets::Classes(labels) => fields.push(format!("{}", labels[i])),
            Targets::Values(values) => fields.push(format!("{}", values[i])),
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Kind of targets expected by [`import_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Classes,
    Values,
}

/// Reads a dataset written by [`export_csv`]. The standardizer is reset to
/// the identity; callers re-standardize if needed.
pub fn import_csv(path: &Path, kind: TargetKind) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty csv".into()))?;
    let n_cols = header.split(',').count();
    if n_cols < 2 {
        return Err(Error::Format("csv needs at least one input column".into()));
    }
    let n = n_cols - 1;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_cols {
            return Err(Error::Format(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                n_cols,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(n);
        for f in &fields[..n] {
            row.push(f.trim().parse::<f64>().map_err(|e| {
                Error::Format(format!("line {}: bad number {f:?}: {e}", lineno + 2))
            })?);
        }
        rows.push(row);
        let t = fields[n].trim();
        match kind {
            TargetKind::Classes => labels.push(t.parse::<usize>().map_err(|e| {
                Error::Format(format!("line {}: bad label {t:?}: {e}", lineno + 2))
            })?),
            TargetKind::Values => values.push(t.parse::<f64>().map_err(|e| {
                Error::Format(format!("line {}: bad target {t:?}: {e}", lineno + 2))
            })?),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv has no data rows".into()));
    }
    let targets = match kind {
        TargetKind::Classes => Targets::Classes(labels),
        TargetKind::Values => Targets::Values(values),
    };
    Ok(LabeledDataset::new(Matrix::from_rows(&rows), targets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moons_without_noise_sit_on_unit_circles() {
        let mut rng = Rng::new(3);
        let ds = two_moons(4, 0.0, &mut rng);
        let Targets::Classes(labels) = &ds.targets else {
            panic!("expected class targets")
        };
        for i in 0..4 {
            let p = ds.input(i);
            let r = if labels[i] == 0 {
                (p[0].powi(2) + p[1].powi(2)).sqrt()
            } else {
                ((p[0] - 1.0).powi(2) + (p[1] - 0.5).powi(2)).sqrt()
            };
            assert!((r - 1.0).abs() < 1e-12, "point {i} radius {r}");
        }
    }

    #[test]
    fn moons_labels_balanced() {
        let mut rng = Rng::new(5);
        let ds = two_moons(100, 0.1, &mut rng);
        let Targets::Classes(labels) = &ds.targets else {
            panic!("expected class targets")
        };
        assert_eq!(labels.iter().filter(|l| **l == 0).count(), 50);
        assert_eq!(labels.iter().filter(|l| **l == 1).count(), 50);
    }

    #[test]
    fn generators_are_seed_reproducible() {
        let a = two_moons(20, 0.1, &mut Rng::new(7));
        let b = two_moons(20, 0.1, &mut Rng::new(7));
        assert_eq!(a, b);
        let c = toy_regression_1d(20, 0.1, &mut Rng::new(7));
        let d = toy_regression_1d(20, 0.1, &mut Rng::new(7));
        assert_eq!(c, d);
    }

    #[test]
    fn regression_noise_free_targets_on_curve() {
        let ds = toy_regression_1d(50, 0.0, &mut Rng::new(1));
        let Targets::Values(values) = &ds.targets else {
            panic!("expected value targets")
        };
        for i in 0..ds.len() {
            let x = ds.input(i)[0];
            assert!((TOY_REGRESSION_RANGE.0..=TOY_REGRESSION_RANGE.1).contains(&x));
            assert_eq!(values[i], toy_regression_curve(x));
        }
    }

    #[test]
    fn standardize_centers_and_scales() {
        let mut ds = toy_regression_1d(200, 0.3, &mut Rng::new(9));
        ds.standardize();
        let m = ds.len() as f64;
        let mean: f64 = (0..ds.len()).map(|i| ds.input(i)[0]).sum::<f64>() / m;
        let var: f64 = (0..ds.len())
            .map(|i| (ds.input(i)[0] - mean).powi(2))
            .sum::<f64>()
            / m;
        assert!(mean.abs() < 1e-9);
        assert!((var.sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn standardize_is_idempotent() {
        let mut ds = two_moons(100, 0.1, &mut Rng::new(2));
        ds.standardize();
        let snapshot = ds.clone();
        ds.standardize();
        for i in 0..ds.len() {
            for j in 0..ds.n_dims() {
                assert!((ds.inputs[(i, j)] - snapshot.inputs[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn standardizer_composition_maps_raw_points() {
        let mut ds = two_moons(60, 0.05, &mut Rng::new(4));
        let raw0 = ds.input(0).to_vec();
        ds.standardize();
        let mapped = ds.standardizer.apply_point(&raw0);
        assert!((mapped[0] - ds.inputs[(0, 0)]).abs() < 1e-12);
        assert!((mapped[1] - ds.inputs[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn uniform_outliers_alpha_zero_hits_standardized_origin() {
        let st = Standardizer {
            means: vec![2.0, -1.0],
            stds: vec![4.0, 0.5],
        };
        let out = uniform_outliers(3, 2, 0.0, &st, &mut Rng::new(0));
        for i in 0..3 {
            assert_eq!(out[(i, 0)], (0.0 - 2.0) / 4.0);
            assert_eq!(out[(i, 1)], (0.0 + 1.0) / 0.5);
        }
    }

    #[test]
    fn uniform_outliers_raw_entries_in_alpha_box() {
        let st = Standardizer::identity(3);
        let alpha = 2000.0;
        let out = uniform_outliers(10, 3, alpha, &st, &mut Rng::new(6));
        for i in 0..10 {
            for j in 0..3 {
                // Identity standardizer: entries are the raw scaled draws.
                assert!((0.0..=alpha).contains(&out[(i, j)]));
            }
        }
    }

    #[test]
    fn scale_point_is_linear() {
        let x = vec![1.0, -2.0];
        assert_eq!(scale_point(&x, 1.0), x);
        assert_eq!(scale_point(&x, 0.0), vec![0.0, 0.0]);
        let a = scale_point(&x, 3.0);
        let b: Vec<f64> = scale_point(&x, 1.5).iter().map(|v| 2.0 * v).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("rgpr_data_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("moons.csv");
        let ds = two_moons(10, 0.1, &mut Rng::new(8));
        export_csv(&ds, &path).unwrap();
        let back = import_csv(&path, TargetKind::Classes).unwrap();
        assert_eq!(back.targets, ds.targets);
        for i in 0..ds.len() {
            for j in 0..ds.n_dims() {
                assert_eq!(back.inputs[(i, j)], ds.inputs[(i, j)]);
            }
        }
    }
}
