//! Cross-validated evaluation.
//!
//! Predictions from the held-out folds are pooled into one confusion
//! matrix (the headline report); per-fold accuracies and their mean are
//! reported alongside. The pipeline variant refits vocabulary, label maps,
//! and scalers inside every training fold, so nothing leaks from held-out
//! rows.

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, FoldPlan};
use crate::error::Result;
use crate::eval::{compute_metrics, MetricsReport};
use crate::features::{FeatureMatrix, PipelineSpec};
use crate::learners::{fit_with_classes, ModelSpec};
use crate::scalar::Scalar;

/// Pooled metrics plus the per-fold accuracy trail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport<F> {
    pub pooled: MetricsReport<F>,
    pub fold_accuracies: Vec<F>,
    pub mean_fold_accuracy: F,
}

fn finalize_report<F: Scalar>(
    y_true: Vec<usize>,
    y_pred: Vec<usize>,
    fold_accuracies: Vec<F>,
    n_classes: usize,
) -> Result<CvReport<F>> {
    let pooled = compute_metrics(&y_true, &y_pred, n_classes)?;
    let mean_fold_accuracy =
        fold_accuracies.iter().copied().sum::<F>() / F::from_count(fold_accuracies.len().max(1));
    Ok(CvReport {
        pooled,
        fold_accuracies,
        mean_fold_accuracy,
    })
}

fn fold_accuracy<F: Scalar>(truth: &[usize], preds: &[usize]) -> F {
    let correct = truth.iter().zip(preds).filter(|(t, p)| t == p).count();
    F::from_count(correct) / F::from_count(truth.len().max(1))
}

/// Cross-validates a model spec on a prebuilt feature matrix.
///
/// Model-internal state (including standardizers) is refit per training
/// fold by [`fit_with_classes`].
pub fn cross_validate<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    folds: &FoldPlan,
) -> Result<CvReport<F>> {
    let mut y_true = Vec::with_capacity(y.len());
    let mut y_pred = Vec::with_capacity(y.len());
    let mut fold_accuracies = Vec::with_capacity(folds.k());

    for fold in 0..folds.k() {
        let (train_idx, test_idx) = folds.train_test(fold);
        let x_train = x.subset_rows(&train_idx);
        let y_train: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
        let x_test = x.subset_rows(test_idx);
        let truth: Vec<usize> = test_idx.iter().map(|&i| y[i]).collect();

        let model = fit_with_classes(spec, &x_train, &y_train, n_classes)
            .map_err(|e| e.in_fold(fold))?;
        let preds = model.predict(&x_test).map_err(|e| e.in_fold(fold))?;

        fold_accuracies.push(fold_accuracy(&truth, &preds));
        y_true.extend(truth);
        y_pred.extend(preds);
    }

    finalize_report(y_true, y_pred, fold_accuracies, n_classes)
}

/// Cross-validates end to end from records: the feature pipeline
/// (curated encoders or vocabulary) is refit on each training fold.
pub fn cross_validate_pipeline<F: Scalar>(
    spec: &ModelSpec,
    dataset: &Dataset,
    pipeline: &PipelineSpec,
    folds: &FoldPlan,
) -> Result<CvReport<F>> {
    let n_classes = dataset.n_classes();
    let mut y_true = Vec::with_capacity(dataset.len());
    let mut y_pred = Vec::with_capacity(dataset.len());
    let mut fold_accuracies = Vec::with_capacity(folds.k());

    for fold in 0..folds.k() {
        let (train_idx, test_idx) = folds.train_test(fold);
        let train_records: Vec<&_> = train_idx.iter().map(|&i| &dataset.records[i]).collect();
        let test_records: Vec<&_> = test_idx.iter().map(|&i| &dataset.records[i]).collect();
        let y_train: Vec<usize> = train_idx.iter().map(|&i| dataset.labels[i]).collect();
        let truth: Vec<usize> = test_idx.iter().map(|&i| dataset.labels[i]).collect();

        let fitted = pipeline.fit(&train_records).map_err(|e| e.in_fold(fold))?;
        let x_train = fitted.transform(&train_records).map_err(|e| e.in_fold(fold))?;
        let x_test = fitted.transform(&test_records).map_err(|e| e.in_fold(fold))?;

        let model = fit_with_classes(spec, &x_train, &y_train, n_classes)
            .map_err(|e| e.in_fold(fold))?;
        let preds = model.predict(&x_test).map_err(|e| e.in_fold(fold))?;

        fold_accuracies.push(fold_accuracy(&truth, &preds));
        y_true.extend(truth);
        y_pred.extend(preds);
    }

    finalize_report(y_true, y_pred, fold_accuracies, n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::stratified_indices;
    use crate::features::FeatureKind;
    use crate::learners::Algorithm;

    #[test]
    fn constant_label_data_scores_perfectly() {
        let x = FeatureMatrix::from_rows(
            (0..12).map(|i| vec![i as f64]).collect(),
            vec!["f".into()],
            FeatureKind::Derived,
        )
        .unwrap();
        let y = vec![0usize; 12];
        let folds = stratified_indices(&y, 3, 1).unwrap();
        let report =
            cross_validate::<f64>(&ModelSpec::new(Algorithm::GaussianNb), &x, &y, 1, &folds)
                .unwrap();
        assert_eq!(report.pooled.accuracy, 1.0);
        assert_eq!(report.mean_fold_accuracy, 1.0);
    }

    #[test]
    fn pooled_metrics_recompute_from_confusion() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let noisy = i % 7 == 0;
            let class = i % 2;
            let base = if class == 0 { 0.0 } else { 4.0 };
            rows.push(vec![base + if noisy { 4.0 } else { 0.0 } + (i as f64 * 0.01)]);
            y.push(class);
        }
        let x = FeatureMatrix::from_rows(rows, vec!["f".into()], FeatureKind::Derived).unwrap();
        let folds = stratified_indices(&y, 4, 3).unwrap();
        let report =
            cross_validate::<f64>(&ModelSpec::new(Algorithm::Knn).with_int("k", 3), &x, &y, 2, &folds)
                .unwrap();
        // Independent recomputation from the emitted confusion matrix.
        let recomputed = crate::eval::metrics_from_confusion::<f64>(&report.pooled.confusion);
        assert_eq!(report.pooled.accuracy, recomputed.accuracy);
        for (a, b) in report.pooled.per_class.iter().zip(&recomputed.per_class) {
            assert_eq!(a.precision, b.precision);
            assert_eq!(a.recall, b.recall);
            assert_eq!(a.f1, b.f1);
        }
        // Pooled support covers every record exactly once.
        assert_eq!(report.pooled.support.iter().sum::<usize>(), 40);
    }
}
