//! Evaluation: per-class metrics, cross-validation, grid search, feature
//! importance, and the 5x2cv F-test.

mod cv;
mod grid;
mod importance;
mod stats;

pub use cv::{cross_validate, cross_validate_pipeline, CvReport};
pub use grid::{default_grid, grid_search, GridSearchResult, ParamGrid};
pub use importance::{feature_importance, select_top_k, ImportanceMethod, ImportanceReport};
pub use stats::{
    betainc, f_upper_tail, five_by_two_from_table, five_by_two_ftest, five_by_two_ftest_pipeline,
    Decision, FiveByTwoResult,
};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};
use crate::scalar::Scalar;

/// Precision/recall/F1 for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

/// Confusion matrix (rows = true class) with derived per-class metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport<F> {
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: F,
    pub per_class: Vec<ClassMetrics<F>>,
    pub support: Vec<usize>,
}

/// Builds a report from pooled predictions.
pub fn compute_metrics<F: Scalar>(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<MetricsReport<F>> {
    if y_true.len() != y_pred.len() {
        return Err(TriageError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(TriageError::DegenerateData {
            detail: "metrics need at least one prediction".into(),
        });
    }
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
    }
    Ok(metrics_from_confusion(&confusion))
}

/// Derives accuracy and per-class precision/recall/F1 from a confusion
/// matrix; all 0/0 cases resolve to 0.
pub fn metrics_from_confusion<F: Scalar>(confusion: &[Vec<usize>]) -> MetricsReport<F> {
    let n_classes = confusion.len();
    let total: usize = confusion.iter().map(|row| row.iter().sum::<usize>()).sum();
    let trace: usize = (0..n_classes).map(|c| confusion[c][c]).sum();
    let accuracy = if total > 0 {
        F::from_count(trace) / F::from_count(total)
    } else {
        F::zero()
    };

    let ratio = |num: usize, den: usize| {
        if den == 0 {
            F::zero()
        } else {
            F::from_count(num) / F::from_count(den)
        }
    };
    let per_class: Vec<ClassMetrics<F>> = (0..n_classes)
        .map(|c| {
            let tp = confusion[c][c];
            let predicted: usize = (0..n_classes).map(|t| confusion[t][c]).sum();
            let actual: usize = confusion[c].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, actual);
            let f1 = if precision + recall > F::zero() {
                F::real(2.0) * precision * recall / (precision + recall)
            } else {
                F::zero()
            };
            ClassMetrics {
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let support = confusion.iter().map(|row| row.iter().sum()).collect();

    MetricsReport {
        confusion: confusion.to_vec(),
        accuracy,
        per_class,
        support,
    }
}

impl<F: Scalar> MetricsReport<F> {
    pub fn n_classes(&self) -> usize {
        self.confusion.len()
    }

    /// Confusion matrix as CSV with true classes on rows.
    pub fn write_confusion_csv<W: Write>(&self, writer: W, labels: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["true\\pred".to_string()];
        header.extend_from_slice(labels);
        w.write_record(&header)?;
        for (c, row) in self.confusion.iter().enumerate() {
            let mut record = vec![labels[c].clone()];
            record.extend(row.iter().map(usize::to_string));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let report = compute_metrics::<f64>(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(report.accuracy, 1.0);
        for metrics in &report.per_class {
            if metrics.recall > 0.0 {
                assert_eq!(metrics.f1, 1.0);
            }
        }
    }

    #[test]
    fn hand_counted_fixture() {
        // Confusion [[2, 0], [1, 1]]: accuracy 3/4, precision0 = 2/3,
        // recall0 = 1.
        let y_true = [0, 0, 1, 1];
        let y_pred = [0, 0, 0, 1];
        let report = compute_metrics::<f64>(&y_true, &y_pred, 2).unwrap();
        assert_eq!(report.confusion, vec![vec![2, 0], vec![1, 1]]);
        assert!((report.accuracy - 0.75).abs() < 1e-12);
        assert!((report.per_class[0].precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.per_class[0].recall - 1.0).abs() < 1e-12);
        assert_eq!(report.support, vec![2, 2]);
    }

    #[test]
    fn zero_division_resolves_to_zero() {
        // Class 1 never predicted and never present.
        let report = compute_metrics::<f64>(&[0, 0], &[0, 0], 2).unwrap();
        assert_eq!(report.per_class[1].precision, 0.0);
        assert_eq!(report.per_class[1].recall, 0.0);
        assert_eq!(report.per_class[1].f1, 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            compute_metrics::<f64>(&[0], &[0, 1], 2),
            Err(TriageError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn micro_recall_equals_accuracy() {
        // Micro-averaged recall (trace / total) is accuracy for
        // single-label classification; spot-check on an uneven matrix.
        let confusion = vec![vec![5, 2, 1], vec![0, 7, 3], vec![2, 2, 9]];
        let report = metrics_from_confusion::<f64>(&confusion);
        let trace: usize = (0..3).map(|c| confusion[c][c]).sum();
        let total: usize = confusion.iter().flatten().sum();
        assert!((report.accuracy - trace as f64 / total as f64).abs() < 1e-12);
    }
}
