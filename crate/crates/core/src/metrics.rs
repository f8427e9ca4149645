//! Confusion-matrix accounting and the four classification measures
//! (accuracy, precision, recall, F-score), with class 1 as positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Count TP/FP/TN/FN for 0/1 label vectors of equal length.
pub fn confusion(predicted: &[u8], actual: &[u8]) -> Result<ConfusionCounts> {
    if predicted.len() != actual.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} predicted vs {} actual",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("empty label vectors".into()));
    }
    let mut c = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&p, &a) in predicted.iter().zip(actual.iter()) {
        match (p, a) {
            (1, 1) => c.true_pos += 1,
            (1, 0) => c.false_pos += 1,
            (0, 0) => c.true_neg += 1,
            (0, 1) => c.false_neg += 1,
            _ => return Err(Error::InvalidArgument("labels must be 0 or 1".into())),
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub empirical_error: f64,
}

impl PerformanceReport {
    /// All-zero report; the convention for degenerate evaluations
    /// (e.g. an empty feature subset).
    pub fn zeros() -> Self {
        PerformanceReport {
            accuracy: 0.0,
            precision: 0.0,
            recall: 0.0,
            f_score: 0.0,
            empirical_error: 1.0,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    // 0/0 ratios are defined as 0 (pessimistic convention).
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// The four measures. Zero denominators resolve to 0.
pub fn compute_metrics(c: &ConfusionCounts) -> Result<PerformanceReport> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let accuracy = (c.true_pos + c.true_neg) as f64 / total as f64;
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(PerformanceReport {
        accuracy,
        precision,
        recall,
        f_score,
        empirical_error: 1.0 - accuracy,
    })
}
