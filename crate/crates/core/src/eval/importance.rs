//! Coefficient-based feature importance and top-k selection.
//!
//! Two scorers: a one-way ANOVA F-score of each column against the labels
//! (`TargetCoefficient`) and the mean absolute one-vs-rest logistic
//! coefficient per column after per-column standardization
//! (`ModelWeights`). Constant columns score exactly zero under both.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};
use crate::features::FeatureMatrix;
use crate::scalar::Scalar;

/// Which importance computation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImportanceMethod {
    /// One-way ANOVA F-score per column against the target.
    TargetCoefficient,
    /// Mean |one-vs-rest logistic coefficient| per standardized column.
    ModelWeights,
}

impl ImportanceMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ImportanceMethod::TargetCoefficient => "target_coefficient",
            ImportanceMethod::ModelWeights => "model_weights",
        }
    }
}

/// Scores per column plus the ranking (descending |score|, lexicographic
/// tie-break).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceReport<F> {
    pub method: ImportanceMethod,
    pub scores: BTreeMap<String, F>,
    pub ranking: Vec<String>,
}

/// Sentinel for perfectly separating columns (zero within-class variance
/// with real between-class spread).
const PERFECT_SEPARATION_SCORE: f64 = 1e12;

fn anova_scores<F: Scalar>(x: &FeatureMatrix<F>, y: &[usize], n_classes: usize) -> Vec<f64> {
    let n = x.rows();
    let mut class_counts = vec![0usize; n_classes];
    for &c in y {
        class_counts[c] += 1;
    }
    let k = class_counts.iter().filter(|&&c| c > 0).count();

    (0..x.cols())
        .map(|col| {
            let mut grand = 0.0;
            let mut class_sums = vec![0.0; n_classes];
            for r in 0..n {
                let v = x.get(r, col).as_f64();
                grand += v;
                class_sums[y[r]] += v;
            }
            let grand_mean = grand / n as f64;
            let mut ssb = 0.0;
            let mut ssw = 0.0;
            for r in 0..n {
                let v = x.get(r, col).as_f64();
                let class_mean = class_sums[y[r]] / class_counts[y[r]] as f64;
                ssw += (v - class_mean).powi(2);
            }
            for (c, &count) in class_counts.iter().enumerate() {
                if count > 0 {
                    let class_mean = class_sums[c] / count as f64;
                    ssb += count as f64 * (class_mean - grand_mean).powi(2);
                }
            }
            if k < 2 || n <= k {
                return 0.0;
            }
            let msb = ssb / (k - 1) as f64;
            let msw = ssw / (n - k) as f64;
            if msb <= 0.0 {
                0.0
            } else if msw <= 0.0 {
                PERFECT_SEPARATION_SCORE
            } else {
                msb / msw
            }
        })
        .collect()
}

/// Binary logistic regression by deterministic full-batch gradient descent
/// from zero init; returns the d coefficient magnitudes (bias excluded).
fn binary_logistic_weights(
    columns: &[Vec<f64>],
    targets: &[f64],
    epochs: usize,
    lr0: f64,
    l2: f64,
) -> Vec<f64> {
    let n = targets.len();
    let d = columns.len();
    let mut w = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    for epoch in 0..epochs {
        grad.fill(0.0);
        for r in 0..n {
            let mut z = w[d];
            for (j, col) in columns.iter().enumerate() {
                z += w[j] * col[r];
            }
            let p = 1.0 / (1.0 + (-z).exp());
            let delta = (p - targets[r]) / n as f64;
            for (j, col) in columns.iter().enumerate() {
                grad[j] += delta * col[r];
            }
            grad[d] += delta;
        }
        for (j, g) in grad.iter_mut().enumerate().take(d) {
            *g += l2 * w[j];
        }
        let lr = lr0 / (1.0 + 0.01 * epoch as f64);
        for (wj, g) in w.iter_mut().zip(&grad) {
            *wj -= lr * *g;
        }
    }
    w[..d].iter().map(|v| v.abs()).collect()
}

fn model_weight_scores<F: Scalar>(x: &FeatureMatrix<F>, y: &[usize], n_classes: usize) -> Vec<f64> {
    let n = x.rows();
    let d = x.cols();
    // Standardize per column; constant columns become all-zero.
    let mut columns: Vec<Vec<f64>> = vec![vec![0.0; n]; d];
    let mut constant = vec![false; d];
    for (col, slot) in columns.iter_mut().enumerate() {
        for (r, cell) in slot.iter_mut().enumerate() {
            *cell = x.get(r, col).as_f64();
        }
        let mean = slot.iter().sum::<f64>() / n as f64;
        let var = slot.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        if var <= 0.0 {
            constant[col] = true;
            slot.fill(0.0);
        } else {
            let std = var.sqrt();
            for v in slot.iter_mut() {
                *v = (*v - mean) / std;
            }
        }
    }

    let mut scores = vec![0.0; d];
    let mut active_classes = 0usize;
    for class in 0..n_classes {
        if !y.contains(&class) {
            continue;
        }
        active_classes += 1;
        let targets: Vec<f64> = y.iter().map(|&c| f64::from(c == class)).collect();
        let weights = binary_logistic_weights(&columns, &targets, 200, 0.5, 1e-3);
        for (s, wabs) in scores.iter_mut().zip(&weights) {
            *s += wabs;
        }
    }
    for (col, s) in scores.iter_mut().enumerate() {
        if constant[col] {
            *s = 0.0;
        } else if active_classes > 0 {
            *s /= active_classes as f64;
        }
    }
    scores
}

/// Scores every column of `x` against the labels.
pub fn feature_importance<F: Scalar>(
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    method: ImportanceMethod,
) -> Result<ImportanceReport<F>> {
    if x.rows() != y.len() || x.rows() == 0 {
        return Err(TriageError::DegenerateData {
            detail: format!("importance needs matching non-empty x/y, got {} rows", x.rows()),
        });
    }
    let raw = match method {
        ImportanceMethod::TargetCoefficient => anova_scores(x, y, n_classes),
        ImportanceMethod::ModelWeights => model_weight_scores(x, y, n_classes),
    };
    let names = x.column_names();
    let mut ranking: Vec<usize> = (0..x.cols()).collect();
    ranking.sort_by(|&a, &b| {
        raw[b]
            .abs()
            .partial_cmp(&raw[a].abs())
            .expect("finite scores")
            .then_with(|| names[a].cmp(&names[b]))
    });
    Ok(ImportanceReport {
        method,
        scores: names
            .iter()
            .zip(&raw)
            .map(|(name, &score)| (name.clone(), F::real(score)))
            .collect(),
        ranking: ranking.into_iter().map(|i| names[i].clone()).collect(),
    })
}

/// First `k` columns of the ranking.
pub fn select_top_k<F: Scalar>(report: &ImportanceReport<F>, k: usize) -> Result<Vec<String>> {
    if k < 1 || k > report.ranking.len() {
        return Err(TriageError::BadK {
            k,
            n: report.ranking.len(),
        });
    }
    Ok(report.ranking[..k].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;

    /// Labels = indicator(column0 > median); column0 must rank first.
    fn synthetic() -> (FeatureMatrix<f64>, Vec<usize>) {
        let n = 60;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let v = i as f64;
                vec![
                    v,
                    (v * 1.37).sin() * 3.0,
                    ((i * 7919) % 13) as f64,
                    5.0,
                ]
            })
            .collect();
        let y: Vec<usize> = (0..n).map(|i| usize::from(i as f64 > 29.5)).collect();
        (
            FeatureMatrix::from_rows(
                rows,
                vec!["c0".into(), "c1".into(), "c2".into(), "const".into()],
                FeatureKind::Curated,
            )
            .unwrap(),
            y,
        )
    }

    #[test]
    fn constant_column_scores_zero_and_ranks_last() {
        let (x, y) = synthetic();
        for method in [ImportanceMethod::TargetCoefficient, ImportanceMethod::ModelWeights] {
            let report = feature_importance(&x, &y, 2, method).unwrap();
            assert_eq!(report.scores["const"], 0.0, "{method:?}");
            assert_eq!(report.ranking.last().map(String::as_str), Some("const"));
        }
    }

    #[test]
    fn indicator_column_ranks_first_under_both_methods() {
        let (x, y) = synthetic();
        for method in [ImportanceMethod::TargetCoefficient, ImportanceMethod::ModelWeights] {
            let report = feature_importance(&x, &y, 2, method).unwrap();
            assert_eq!(report.ranking[0], "c0", "{method:?}");
        }
    }

    #[test]
    fn top_k_selection() {
        let (x, y) = synthetic();
        let report =
            feature_importance(&x, &y, 2, ImportanceMethod::TargetCoefficient).unwrap();
        assert_eq!(select_top_k(&report, 1).unwrap(), vec!["c0"]);
        assert_eq!(select_top_k(&report, 4).unwrap().len(), 4);
        assert!(matches!(
            select_top_k(&report, 0),
            Err(TriageError::BadK { .. })
        ));
        assert!(matches!(
            select_top_k(&report, 5),
            Err(TriageError::BadK { .. })
        ));
    }

    #[test]
    fn ties_break_lexicographically() {
        let x = FeatureMatrix::from_rows(
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            vec!["zeta".into(), "alpha".into()],
            FeatureKind::Curated,
        )
        .unwrap();
        let y = vec![0, 1, 0, 1];
        let report =
            feature_importance(&x, &y, 2, ImportanceMethod::TargetCoefficient).unwrap();
        // Identical columns tie; the lexicographically smaller name leads.
        assert_eq!(report.ranking, vec!["alpha", "zeta"]);
    }
}
