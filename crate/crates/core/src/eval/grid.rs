//! Grid search with cross-validation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::stratified_indices;
use crate::error::{Result, TriageError};
use crate::eval::cross_validate;
use crate::features::FeatureMatrix;
use crate::learners::{Algorithm, HyperValue, ModelSpec};
use crate::scalar::Scalar;

/// Hyperparameter axes; the last axis varies fastest in the expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamGrid {
    pub axes: Vec<(String, Vec<HyperValue>)>,
}

impl ParamGrid {
    pub fn new() -> Self {
        ParamGrid { axes: Vec::new() }
    }

    pub fn axis(mut self, name: &str, values: Vec<HyperValue>) -> Self {
        self.axes.push((name.to_string(), values));
        self
    }

    pub fn ints(self, name: &str, values: &[i64]) -> Self {
        self.axis(name, values.iter().map(|&v| HyperValue::Int(v)).collect())
    }

    pub fn floats(self, name: &str, values: &[f64]) -> Self {
        self.axis(name, values.iter().map(|&v| HyperValue::Float(v)).collect())
    }

    /// All grid points in declaration order.
    fn points(&self) -> Vec<BTreeMap<String, HyperValue>> {
        let mut points: Vec<BTreeMap<String, HyperValue>> = vec![BTreeMap::new()];
        for (name, values) in &self.axes {
            let mut expanded = Vec::with_capacity(points.len() * values.len());
            for point in &points {
                for value in values {
                    let mut next = point.clone();
                    next.insert(name.clone(), value.clone());
                    expanded.push(next);
                }
            }
            points = expanded;
        }
        points
    }
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self::new()
    }
}

/// Scored grid plus the winning point (first point wins ties).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSearchResult<F> {
    pub grid: Vec<(BTreeMap<String, HyperValue>, F)>,
    pub best: BTreeMap<String, HyperValue>,
    pub best_accuracy: F,
}

impl<F: Scalar> GridSearchResult<F> {
    /// Grid table as CSV: one row per point, parameters then accuracy.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let names: Vec<&String> = self
            .grid
            .first()
            .map(|(p, _)| p.keys().collect())
            .unwrap_or_default();
        let mut header: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        header.push("mean_cv_accuracy".into());
        w.write_record(&header)?;
        for (point, accuracy) in &self.grid {
            let mut record: Vec<String> = names
                .iter()
                .map(|n| point.get(*n).map(|v| v.to_string()).unwrap_or_default())
                .collect();
            record.push(format!("{accuracy}"));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores every grid point by k-fold mean accuracy on one shared fold
/// plan and returns the best point (maximum mean accuracy, first in grid
/// order on ties).
pub fn grid_search<F: Scalar>(
    template: &ModelSpec,
    grid: &ParamGrid,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<GridSearchResult<F>> {
    let points = grid.points();
    if grid.axes.is_empty() || points.is_empty() {
        return Err(TriageError::Invalid("grid search needs a non-empty grid".into()));
    }
    let folds = stratified_indices(y, k, seed)?;

    let mut scored: Vec<(BTreeMap<String, HyperValue>, F)> = Vec::with_capacity(points.len());
    for point in points {
        let mut spec = template.clone();
        for (name, value) in &point {
            spec.params.insert(name.clone(), value.clone());
        }
        let report = cross_validate(&spec, x, y, n_classes, &folds)?;
        scored.push((point, report.mean_fold_accuracy));
    }

    let mut best_idx = 0;
    for (i, (_, accuracy)) in scored.iter().enumerate().skip(1) {
        if *accuracy > scored[best_idx].1 {
            best_idx = i;
        }
    }
    Ok(GridSearchResult {
        best: scored[best_idx].0.clone(),
        best_accuracy: scored[best_idx].1,
        grid: scored,
    })
}

/// Default grids per algorithm.
pub fn default_grid(algorithm: Algorithm) -> ParamGrid {
    match algorithm {
        Algorithm::RandomForest | Algorithm::ExtraTrees => ParamGrid::new()
            .ints("n_estimators", &[100, 300])
            .ints("max_depth", &[0, 16]),
        Algorithm::LinearSvm | Algorithm::LogisticRegression | Algorithm::SgdLinear => {
            ParamGrid::new().floats("c", &[0.01, 0.1, 1.0, 10.0])
        }
        Algorithm::Knn => ParamGrid::new().ints("k", &[3, 5, 11]),
        Algorithm::DecisionTree | Algorithm::BaggedTree | Algorithm::Boosted => {
            ParamGrid::new().ints("max_depth", &[0, 8, 16])
        }
        Algorithm::Mlp => ParamGrid::new().ints("hidden", &[50, 100]),
        _ => ParamGrid::new().ints("stack_folds", &[5]),
    }
}
