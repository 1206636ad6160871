//! Multi-class precision/recall/F1 with macro and weighted averages.

use serde::{Deserialize, Serialize};

use crate::sensor_data::ActivityLabel;

use super::LearnError;

const N: usize = ActivityLabel::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of evaluated windows whose true label is this class.
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class and averaged classification quality over a set of
/// (true, predicted) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Indexed by [`ActivityLabel::index`]. Classes with zero support
    /// report 0 for precision, recall and f1, and still participate in the
    /// macro average.
    pub per_class: [ClassMetrics; N],
    /// Unweighted mean over all five classes.
    pub macro_avg: AverageMetrics,
    /// Support-weighted mean; its recall equals overall accuracy.
    pub weighted_avg: AverageMetrics,
    /// confusion[true][predicted] counts.
    pub confusion: [[usize; N]; N],
    pub total: usize,
}

impl MetricsReport {
    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..N).map(|i| self.confusion[i][i]).sum();
        correct as f64 / self.total as f64
    }

    pub fn class(&self, label: ActivityLabel) -> &ClassMetrics {
        &self.per_class[label.index()]
    }
}

/// Computes the report from (true, predicted) pairs.
pub fn compute_metrics(
    pairs: &[(ActivityLabel, ActivityLabel)],
) -> Result<MetricsReport, LearnError> {
    if pairs.is_empty() {
        return Err(LearnError::EmptyInput);
    }

    let mut confusion = [[0usize; N]; N];
    for (truth, pred) in pairs {
        confusion[truth.index()][pred.index()] += 1;
    }

    let mut per_class = [ClassMetrics {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        support: 0,
    }; N];

    for c in 0..N {
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..N).map(|r| confusion[r][c]).sum();
        let correct = confusion[c][c];
        let precision = if predicted > 0 {
            correct as f64 / predicted as f64
        } else {
            0.0
        };
        let recall = if support > 0 {
            correct as f64 / support as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class[c] = ClassMetrics {
            precision,
            recall,
            f1,
            support,
        };
    }

    let total = pairs.len();
    let macro_avg = AverageMetrics {
        precision: per_class.iter().map(|m| m.precision).sum::<f64>() / N as f64,
        recall: per_class.iter().map(|m| m.recall).sum::<f64>() / N as f64,
        f1: per_class.iter().map(|m| m.f1).sum::<f64>() / N as f64,
    };
    let weight = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|m| f(m) * m.support as f64)
            .sum::<f64>()
            / total as f64
    };
    let weighted_avg = AverageMetrics {
        precision: weight(|m| m.precision),
        recall: weight(|m| m.recall),
        f1: weight(|m| m.f1),
    };

    Ok(MetricsReport {
        per_class,
        macro_avg,
        weighted_avg,
        confusion,
        total,
    })
}
