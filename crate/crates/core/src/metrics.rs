//! Cost, epoch totals, ROC points and AUC.

use crate::error::{Error, Result};

/// `(T - O)^2 / 2`
pub fn sample_cost(target: f64, output: f64) -> f64 {
    let d = target - output;
    0.5 * d * d
}

pub fn total_error(per_sample: &[f64]) -> f64 {
    per_sample.iter().sum()
}

/// Per-epoch summary of a set of training histories.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub mean_e_total: f64,
    /// Population standard deviation across realizations.
    pub std_e_total: f64,
}

/// Mean and standard deviation per epoch across equally long histories.
pub fn aggregate_histories(histories: &[Vec<f64>]) -> Result<Vec<EpochRecord>> {
    let Some(first) = histories.first() else {
        return Err(Error::InvalidParameter("no histories to aggregate".into()));
    };
    let epochs = first.len();
    if let Some(h) = histories.iter().find(|h| h.len() != epochs) {
        return Err(Error::DimensionMismatch {
            expected: epochs,
            actual: h.len(),
        });
    }
    let n = histories.len() as f64;
    Ok((0..epochs)
        .map(|e| {
            let mean = histories.iter().map(|h| h[e]).sum::<f64>() / n;
            let var = histories.iter().map(|h| (h[e] - mean).powi(2)).sum::<f64>() / n;
            EpochRecord {
                epoch: e + 1,
                mean_e_total: mean,
                std_e_total: var.sqrt(),
            }
        })
        .collect())
}

/// First 0-based epoch whose value is at most `fraction` of the first epoch's.
pub fn epochs_to_fraction(curve: &[f64], fraction: f64) -> Option<usize> {
    let first = *curve.first()?;
    curve.iter().position(|&e| e <= fraction * first)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    Ok((positives, negatives))
}

/// True- and false-positive rates at each threshold. A score equal to the
/// threshold counts as positive.
pub fn roc_points(scores: &[f64], labels: &[bool], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    let (p, n) = class_counts(scores, labels)?;
    Ok(thresholds
        .iter()
        .map(|&threshold| {
            let (mut tp, mut fp) = (0usize, 0usize);
            for (&s, &l) in scores.iter().zip(labels) {
                if s >= threshold {
                    if l {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            RocPoint {
                threshold,
                tpr: tp as f64 / p as f64,
                fpr: fp as f64 / n as f64,
            }
        })
        .collect())
}

/// Trapezoidal area under the ROC curve swept over every distinct score.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (p, n) = class_counts(scores, labels)?;
    let mut ranked: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < ranked.len() {
        let (prev_tp, prev_fp) = (tp, fp);
        let cutoff = ranked[i].0;
        while i < ranked.len() && ranked[i].0 == cutoff {
            if ranked[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area += (fp - prev_fp) as f64 * (tp + prev_tp) as f64 / 2.0;
    }
    Ok(area / (p as f64 * n as f64))
}
