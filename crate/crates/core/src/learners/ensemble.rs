//! Voting, stacking, and one-vs-rest ensembles.

use serde::{Deserialize, Serialize};

use crate::corpus::stratified_indices;
use crate::error::{Result, TriageError};
use crate::features::{FeatureKind, FeatureMatrix};
use crate::learners::{
    argmax_lowest, derive_seed, fit_with_classes, Algorithm, ClassifierModel, ModelSpec,
    ParamReader,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct VotingState<F: Scalar> {
    pub bases: Vec<ClassifierModel<F>>,
    pub soft: bool,
}

pub(crate) fn fit_voting<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    soft: bool,
) -> Result<VotingState<F>> {
    ParamReader::new(spec).finish()?;
    if spec.base_specs.is_empty() {
        return Err(TriageError::BadHyperparameter {
            algorithm: spec.algorithm.name().to_string(),
            name: "base_specs".into(),
            detail: "voting requires at least one base spec".into(),
        });
    }
    let bases = spec
        .base_specs
        .iter()
        .map(|base| fit_with_classes(base, x, y, n_classes))
        .collect::<Result<Vec<_>>>()?;
    Ok(VotingState { bases, soft })
}

impl<F: Scalar> VotingState<F> {
    pub fn predict_proba(
        &self,
        x: &FeatureMatrix<F>,
        n_classes: usize,
    ) -> Result<Vec<Vec<F>>> {
        let per_base: Vec<Vec<Vec<F>>> = self
            .bases
            .iter()
            .map(|b| b.predict_proba(x))
            .collect::<Result<Vec<_>>>()?;
        let n_bases = F::from_count(self.bases.len());
        Ok((0..x.rows())
            .map(|r| {
                if self.soft {
                    let mut acc = vec![F::zero(); n_classes];
                    for probs in &per_base {
                        for (slot, p) in probs[r].iter().enumerate() {
                            acc[slot] += *p;
                        }
                    }
                    for a in &mut acc {
                        *a = *a / n_bases;
                    }
                    acc
                } else {
                    // Hard voting: majority of base argmax votes as a
                    // degenerate one-hot row, ties toward the lowest code.
                    let mut votes = vec![0usize; n_classes];
                    for probs in &per_base {
                        votes[argmax_lowest(&probs[r])] += 1;
                    }
                    let mut winner = 0usize;
                    for (c, &v) in votes.iter().enumerate().skip(1) {
                        if v > votes[winner] {
                            winner = c;
                        }
                    }
                    let mut row = vec![F::zero(); n_classes];
                    row[winner] = F::one();
                    row
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct OvrState<F: Scalar> {
    pub models: Vec<ClassifierModel<F>>,
    /// True when the problem was already binary and a single base model
    /// was fitted directly.
    pub collapsed: bool,
}

pub(crate) fn fit_ovr<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<OvrState<F>> {
    ParamReader::new(spec).finish()?;
    if spec.base_specs.len() != 1 {
        return Err(TriageError::BadHyperparameter {
            algorithm: spec.algorithm.name().to_string(),
            name: "base_specs".into(),
            detail: format!(
                "one-vs-rest takes exactly one base spec, got {}",
                spec.base_specs.len()
            ),
        });
    }
    let base = &spec.base_specs[0];
    if n_classes <= 2 {
        // Binary problems collapse to the base classifier itself.
        let model = fit_with_classes(base, x, y, n_classes)?;
        return Ok(OvrState {
            models: vec![model],
            collapsed: true,
        });
    }
    let models = (0..n_classes)
        .map(|class| {
            let binary: Vec<usize> = y.iter().map(|&c| usize::from(c == class)).collect();
            fit_with_classes(base, x, &binary, 2)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OvrState {
        models,
        collapsed: false,
    })
}

impl<F: Scalar> OvrState<F> {
    pub fn predict_proba(
        &self,
        x: &FeatureMatrix<F>,
        n_classes: usize,
    ) -> Result<Vec<Vec<F>>> {
        if self.collapsed {
            return self.models[0].predict_proba(x);
        }
        let positives: Vec<Vec<Vec<F>>> = self
            .models
            .iter()
            .map(|m| m.predict_proba(x))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..x.rows())
            .map(|r| {
                let mut row: Vec<F> = (0..n_classes).map(|c| positives[c][r][1]).collect();
                let sum: F = row.iter().copied().sum();
                if sum > F::zero() {
                    for p in &mut row {
                        *p = *p / sum;
                    }
                } else {
                    let u = F::one() / F::from_count(n_classes);
                    row.iter_mut().for_each(|p| *p = u);
                }
                row
            })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct StackingState<F: Scalar> {
    pub bases: Vec<ClassifierModel<F>>,
    pub meta: Box<ClassifierModel<F>>,
}

fn meta_column_names(n_bases: usize, n_classes: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(n_bases * n_classes);
    for b in 0..n_bases {
        for c in 0..n_classes {
            names.push(format!("base{b}_class{c}"));
        }
    }
    names
}

/// Out-of-fold base probabilities as a meta-feature matrix of width
/// `bases × n_classes`. Rows in fold `f` are produced by bases trained on
/// every other fold, so no base model ever sees its own rows.
pub fn stacking_meta_features<F: Scalar>(
    bases: &[ModelSpec],
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<FeatureMatrix<F>> {
    if folds < 2 {
        return Err(TriageError::BadK {
            k: folds,
            n: x.rows(),
        });
    }
    let plan = stratified_indices(y, folds, seed)?;
    let width = bases.len() * n_classes;
    let mut meta = vec![vec![F::zero(); width]; x.rows()];
    for fold in 0..plan.k() {
        let (train_idx, test_idx) = plan.train_test(fold);
        let x_train = x.subset_rows(&train_idx);
        let y_train: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
        let x_test = x.subset_rows(test_idx);
        for (b, base) in bases.iter().enumerate() {
            let model = fit_with_classes(base, &x_train, &y_train, n_classes)
                .map_err(|e| e.in_fold(fold))?;
            let probs = model.predict_proba(&x_test).map_err(|e| e.in_fold(fold))?;
            for (pos, &row) in test_idx.iter().enumerate() {
                for c in 0..n_classes {
                    meta[row][b * n_classes + c] = probs[pos][c];
                }
            }
        }
    }
    FeatureMatrix::from_rows(
        meta,
        meta_column_names(bases.len(), n_classes),
        FeatureKind::Derived,
    )
}

/// Fits a stacking ensemble: the meta-learner trains on out-of-fold base
/// probabilities, then the bases are refit on the full data for inference.
pub fn fit_stacking<F: Scalar>(
    bases: &[ModelSpec],
    meta: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    folds: usize,
    seed: u64,
) -> Result<ClassifierModel<F>> {
    let n_classes = y.iter().copied().max().map_or(1, |m| m + 1);
    let mut spec = ModelSpec::new(Algorithm::Stacking)
        .with_seed(seed)
        .with_int("stack_folds", folds as i64);
    spec.base_specs = bases.to_vec();
    let state = fit_stacking_parts(bases, meta, x, y, n_classes, folds, seed)?;
    Ok(crate::learners::assemble_model(
        spec,
        n_classes,
        x.column_names().to_vec(),
        crate::learners::ModelState::Stacking(state),
    ))
}

pub(crate) fn fit_stacking_spec<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<StackingState<F>> {
    let reader = ParamReader::new(spec);
    let folds = reader.usize("stack_folds", 5, 2)?;
    reader.finish()?;
    if spec.base_specs.len() < 2 {
        return Err(TriageError::BadHyperparameter {
            algorithm: spec.algorithm.name().to_string(),
            name: "base_specs".into(),
            detail: format!(
                "stacking requires at least two base specs, got {}",
                spec.base_specs.len()
            ),
        });
    }
    let meta = ModelSpec::new(Algorithm::LogisticRegression).with_seed(derive_seed(spec.seed, 97));
    fit_stacking_parts(&spec.base_specs, &meta, x, y, n_classes, folds, spec.seed)
}

fn fit_stacking_parts<F: Scalar>(
    bases: &[ModelSpec],
    meta_spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<StackingState<F>> {
    if bases.is_empty() {
        return Err(TriageError::DegenerateData {
            detail: "stacking needs base specs".into(),
        });
    }
    let meta_x = stacking_meta_features(bases, x, y, n_classes, folds, seed)?;
    let meta = fit_with_classes(meta_spec, &meta_x, y, n_classes)?;
    let bases_full = bases
        .iter()
        .map(|base| fit_with_classes(base, x, y, n_classes))
        .collect::<Result<Vec<_>>>()?;
    Ok(StackingState {
        bases: bases_full,
        meta: Box::new(meta),
    })
}

impl<F: Scalar> StackingState<F> {
    pub fn predict_proba(&self, x: &FeatureMatrix<F>) -> Result<Vec<Vec<F>>> {
        let n_classes = self.meta.n_classes;
        let per_base: Vec<Vec<Vec<F>>> = self
            .bases
            .iter()
            .map(|b| b.predict_proba(x))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<F>> = (0..x.rows())
            .map(|r| {
                let mut row = Vec::with_capacity(self.bases.len() * n_classes);
                for probs in &per_base {
                    row.extend(probs[r].iter().copied());
                }
                row
            })
            .collect();
        let meta_x = FeatureMatrix::from_rows(
            rows,
            meta_column_names(self.bases.len(), n_classes),
            FeatureKind::Derived,
        )?;
        self.meta.predict_proba(&meta_x)
    }
}
