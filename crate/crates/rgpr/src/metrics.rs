//! Scalar evaluation metrics: mean maximum confidence (MMC), AUROC, Brier
//! score, predictive entropy, accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary of one method's evaluation on an inlier/outlier protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mmc_in: f64,
    pub mmc_out: f64,
    pub aur: f64,
    pub accuracy: f64,
    pub brier: f64,
    pub mean_entropy: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "mmc_in,mmc_out,aur,accuracy,brier,mean_entropy";

    /// Comma-separated row matching [`Self::CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.mmc_in, self.mmc_out, self.aur, self.accuracy, self.brier, self.mean_entropy
        )
    }

    /// Flat JSON object.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Mean maximum confidence: the arithmetic mean of per-point confidences.
pub fn mmc(confidences: &[f64]) -> Result<f64> {
    if confidences.is_empty() {
        return Err(Error::EmptyInput("mmc".into()));
    }
    Ok(confidences.iter().sum::<f64>() / confidences.len() as f64)
}

/// Area under the ROC curve for separating inliers (positives) from
/// outliers by score: the probability that a random inlier score exceeds a
/// random outlier score, ties counted one half (Mann-Whitney statistic,
/// computed with average ranks).
pub fn auroc(in_scores: &[f64], out_scores: &[f64]) -> Result<f64> {
    if in_scores.is_empty() || out_scores.is_empty() {
        return Err(Error::EmptyInput("auroc".into()));
    }
    let n_in = in_scores.len();
    let n_out = out_scores.len();
    let mut all: Vec<(f64, bool)> = in_scores
        .iter()
        .map(|s| (*s, true))
        .chain(out_scores.iter().map(|s| (*s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores must not be NaN"));
    // Average ranks over tie groups, 1-based.
    let mut rank_sum_in = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for item in &all[i..=j] {
            if item.1 {
                rank_sum_in += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_in - (n_in * (n_in + 1)) as f64 / 2.0;
    Ok(u / (n_in as f64 * n_out as f64))
}

/// Mean Brier score: `mean_i sum_c (p_ic - [c == y_i])^2`.
pub fn brier(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "brier: {} prob vectors vs {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Err(Error::EmptyInput("brier".into()));
    }
    let mut total = 0.0;
    for (p, y) in probs.iter().zip(labels) {
        for (c, pc) in p.iter().enumerate() {
            let target = if c == *y { 1.0 } else { 0.0 };
            total += (pc - target).powi(2);
        }
    }
    Ok(total / probs.len() as f64)
}

/// Shannon entropy in nats, with `0 * ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|v| **v > 0.0).map(|v| -v * v.ln()).sum()
}
