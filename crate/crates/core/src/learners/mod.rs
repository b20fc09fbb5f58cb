//! Shallow classifiers and ensembles behind one fit/predict contract.
//!
//! A [`ModelSpec`] declares the algorithm, hyperparameters, seed, and (for
//! voting, stacking, and one-vs-rest) base specs. [`fit`] turns a spec plus
//! a feature matrix into an immutable [`ClassifierModel`] whose
//! [`predict_proba`](ClassifierModel::predict_proba) rows are simplex
//! vectors and whose [`predict`](ClassifierModel::predict) breaks
//! probability ties toward the lowest label code.
//!
//! Gradient-trained and kNN models standardize curated features internally
//! (per training set); tree and naive-Bayes models consume raw features.

mod boost;
mod ensemble;
mod knn;
mod linear;
mod mlp;
mod naive_bayes;
mod persist;
mod scaler;
mod tree;

pub use ensemble::{fit_stacking, stacking_meta_features};
pub use linear::{HingeObjective, SoftmaxObjective};
pub use mlp::MlpObjective;
pub use persist::{ModelArtifact, MODEL_FORMAT_VERSION};
pub use scaler::Standardizer;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};
use crate::features::{FeatureKind, FeatureMatrix};
use crate::scalar::Scalar;

/// Every supported classification algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    GaussianNb,
    MultinomialNb,
    LogisticRegression,
    LinearSvm,
    SgdLinear,
    Knn,
    DecisionTree,
    RandomForest,
    ExtraTrees,
    BaggedTree,
    Boosted,
    VotingSoft,
    VotingHard,
    Stacking,
    OneVsRest,
    Mlp,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::GaussianNb => "gaussian_nb",
            Algorithm::MultinomialNb => "multinomial_nb",
            Algorithm::LogisticRegression => "logistic_regression",
            Algorithm::LinearSvm => "linear_svm",
            Algorithm::SgdLinear => "sgd_linear",
            Algorithm::Knn => "knn",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::ExtraTrees => "extra_trees",
            Algorithm::BaggedTree => "bagged_tree",
            Algorithm::Boosted => "boosted",
            Algorithm::VotingSoft => "voting_soft",
            Algorithm::VotingHard => "voting_hard",
            Algorithm::Stacking => "stacking",
            Algorithm::OneVsRest => "one_vs_rest",
            Algorithm::Mlp => "mlp",
        }
    }

    /// Parses an algorithm name, accepting common aliases.
    pub fn parse(name: &str) -> Option<Algorithm> {
        match name.to_ascii_lowercase().as_str() {
            "gaussian_nb" | "gnb" | "nb" | "naive_bayes" => Some(Algorithm::GaussianNb),
            "multinomial_nb" | "mnb" => Some(Algorithm::MultinomialNb),
            "logistic_regression" | "logreg" | "lr" => Some(Algorithm::LogisticRegression),
            "linear_svm" | "svm" | "svc" => Some(Algorithm::LinearSvm),
            "sgd_linear" | "sgd" => Some(Algorithm::SgdLinear),
            "knn" => Some(Algorithm::Knn),
            "decision_tree" | "dtree" | "dt" | "cart" => Some(Algorithm::DecisionTree),
            "random_forest" | "rf" => Some(Algorithm::RandomForest),
            "extra_trees" | "et" => Some(Algorithm::ExtraTrees),
            "bagged_tree" | "bagged_dt" | "bagging" => Some(Algorithm::BaggedTree),
            "boosted" | "boosting" | "adaboost" | "rf_boost" => Some(Algorithm::Boosted),
            "voting_soft" => Some(Algorithm::VotingSoft),
            "voting_hard" => Some(Algorithm::VotingHard),
            "stacking" => Some(Algorithm::Stacking),
            "one_vs_rest" | "ovr" => Some(Algorithm::OneVsRest),
            "mlp" | "multilayer" => Some(Algorithm::Mlp),
            _ => None,
        }
    }

    /// Whether fits standardize curated features first.
    fn wants_scaling(&self) -> bool {
        matches!(
            self,
            Algorithm::LogisticRegression
                | Algorithm::LinearSvm
                | Algorithm::SgdLinear
                | Algorithm::Knn
                | Algorithm::Mlp
        )
    }
}

/// A hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Int(i64),
    Float(f64),
    Flag(bool),
    Text(String),
}

impl std::fmt::Display for HyperValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HyperValue::Int(v) => write!(f, "{v}"),
            HyperValue::Float(v) => write!(f, "{v}"),
            HyperValue::Flag(v) => write!(f, "{v}"),
            HyperValue::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Declarative model description: algorithm, hyperparameters, bases, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub params: BTreeMap<String, HyperValue>,
    #[serde(default)]
    pub base_specs: Vec<ModelSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl ModelSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        ModelSpec {
            algorithm,
            params: BTreeMap::new(),
            base_specs: Vec::new(),
            seed: default_seed(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_int(mut self, name: &str, value: i64) -> Self {
        self.params.insert(name.to_string(), HyperValue::Int(value));
        self
    }

    pub fn with_float(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), HyperValue::Float(value));
        self
    }

    pub fn with_flag(mut self, name: &str, value: bool) -> Self {
        self.params.insert(name.to_string(), HyperValue::Flag(value));
        self
    }

    pub fn with_text(mut self, name: &str, value: &str) -> Self {
        self.params
            .insert(name.to_string(), HyperValue::Text(value.to_string()));
        self
    }

    pub fn with_base(mut self, base: ModelSpec) -> Self {
        self.base_specs.push(base);
        self
    }

    pub fn with_param(mut self, name: &str, value: HyperValue) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Named preset used by the command line: attaches default base specs
    /// for the composite algorithms and derives base seeds from `seed`.
    pub fn preset(name: &str, seed: u64) -> Option<ModelSpec> {
        let algorithm = Algorithm::parse(name)?;
        let spec = ModelSpec::new(algorithm).with_seed(seed);
        Some(match algorithm {
            Algorithm::VotingSoft | Algorithm::VotingHard => spec
                .with_base(ModelSpec::new(Algorithm::LogisticRegression).with_seed(seed + 1))
                .with_base(ModelSpec::new(Algorithm::RandomForest).with_seed(seed + 2))
                .with_base(ModelSpec::new(Algorithm::GaussianNb).with_seed(seed + 3)),
            Algorithm::Stacking => spec
                .with_base(ModelSpec::new(Algorithm::RandomForest).with_seed(seed + 1))
                .with_base(ModelSpec::new(Algorithm::LinearSvm).with_seed(seed + 2)),
            Algorithm::OneVsRest => {
                spec.with_base(ModelSpec::new(Algorithm::LinearSvm).with_seed(seed + 1))
            }
            _ => spec,
        })
    }
}

/// Typed hyperparameter access with unknown-name rejection.
pub(crate) struct ParamReader<'a> {
    algorithm: Algorithm,
    map: &'a BTreeMap<String, HyperValue>,
    seen: std::cell::RefCell<Vec<&'a str>>,
}

impl<'a> ParamReader<'a> {
    pub fn new(spec: &'a ModelSpec) -> Self {
        ParamReader {
            algorithm: spec.algorithm,
            map: &spec.params,
            seen: std::cell::RefCell::new(Vec::new()),
        }
    }

    pub fn bad(&self, name: &str, detail: impl Into<String>) -> TriageError {
        TriageError::BadHyperparameter {
            algorithm: self.algorithm.name().to_string(),
            name: name.to_string(),
            detail: detail.into(),
        }
    }

    fn lookup(&self, name: &'a str) -> Option<&'a HyperValue> {
        self.seen.borrow_mut().push(name);
        self.map.get(name)
    }

    pub fn usize(&self, name: &'a str, default: usize, min: usize) -> Result<usize> {
        match self.lookup(name) {
            None => Ok(default),
            Some(HyperValue::Int(v)) if *v >= min as i64 => Ok(*v as usize),
            Some(HyperValue::Int(v)) => Err(self.bad(name, format!("{v} is below minimum {min}"))),
            Some(other) => Err(self.bad(name, format!("expected an integer, got {other}"))),
        }
    }

    pub fn float(&self, name: &'a str, default: f64, min_exclusive: f64) -> Result<f64> {
        let value = match self.lookup(name) {
            None => return Ok(default),
            Some(HyperValue::Float(v)) => *v,
            Some(HyperValue::Int(v)) => *v as f64,
            Some(other) => return Err(self.bad(name, format!("expected a number, got {other}"))),
        };
        if !value.is_finite() || value <= min_exclusive {
            return Err(self.bad(name, format!("{value} must be > {min_exclusive}")));
        }
        Ok(value)
    }

    pub fn float_min_inclusive(&self, name: &'a str, default: f64, min: f64) -> Result<f64> {
        let value = match self.lookup(name) {
            None => return Ok(default),
            Some(HyperValue::Float(v)) => *v,
            Some(HyperValue::Int(v)) => *v as f64,
            Some(other) => return Err(self.bad(name, format!("expected a number, got {other}"))),
        };
        if !value.is_finite() || value < min {
            return Err(self.bad(name, format!("{value} must be >= {min}")));
        }
        Ok(value)
    }

    pub fn flag(&self, name: &'a str, default: bool) -> Result<bool> {
        match self.lookup(name) {
            None => Ok(default),
            Some(HyperValue::Flag(v)) => Ok(*v),
            Some(other) => Err(self.bad(name, format!("expected a flag, got {other}"))),
        }
    }

    /// Depth parameter: 0 (or absent default) means unlimited.
    pub fn depth(&self, name: &'a str, default: Option<u32>) -> Result<Option<u32>> {
        match self.lookup(name) {
            None => Ok(default),
            Some(HyperValue::Int(0)) => Ok(None),
            Some(HyperValue::Int(v)) if *v > 0 => Ok(Some(*v as u32)),
            Some(other) => Err(self.bad(name, format!("expected a depth >= 0, got {other}"))),
        }
    }

    /// Feature subsampling: `"sqrt"`, `"all"`, or a positive count.
    pub fn max_features(&self, name: &'a str, default: tree::MaxFeatures) -> Result<tree::MaxFeatures> {
        match self.lookup(name) {
            None => Ok(default),
            Some(HyperValue::Text(t)) if t == "sqrt" => Ok(tree::MaxFeatures::Sqrt),
            Some(HyperValue::Text(t)) if t == "all" => Ok(tree::MaxFeatures::All),
            Some(HyperValue::Int(v)) if *v >= 1 => Ok(tree::MaxFeatures::Count(*v as usize)),
            Some(other) => Err(self.bad(name, format!("expected 'sqrt', 'all', or a count, got {other}"))),
        }
    }

    /// Rejects hyperparameters no accessor asked for.
    pub fn finish(&self) -> Result<()> {
        let seen = self.seen.borrow();
        for name in self.map.keys() {
            if !seen.iter().any(|s| s == name) {
                return Err(self.bad(name, "unknown hyperparameter for this algorithm"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum ModelState<F: Scalar> {
    Gaussian(naive_bayes::GaussianNbState<F>),
    Multinomial(naive_bayes::MultinomialNbState<F>),
    Linear(linear::LinearState<F>),
    Knn(knn::KnnState<F>),
    Tree(tree::TreeState<F>),
    Forest(tree::ForestState<F>),
    Boosted(boost::BoostedState<F>),
    Voting(ensemble::VotingState<F>),
    Stacking(ensemble::StackingState<F>),
    OneVsRest(ensemble::OvrState<F>),
    Mlp(mlp::MlpState<F>),
}

/// A trained, immutable classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierModel<F: Scalar> {
    pub spec: ModelSpec,
    pub n_classes: usize,
    pub column_names: Vec<String>,
    scaler: Option<Standardizer<F>>,
    state: ModelState<F>,
}

/// Index of the largest probability, breaking exact ties toward the lowest
/// label code.
pub fn argmax_lowest<F: Scalar>(probs: &[F]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Fits a model, inferring the class count from the labels.
pub fn fit<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
) -> Result<ClassifierModel<F>> {
    let n_classes = y.iter().copied().max().map_or(1, |m| m + 1);
    fit_with_classes(spec, x, y, n_classes)
}

/// Fits a model against an explicit label space `0..n_classes`; folds that
/// happen to miss a class still produce probability rows of full width.
pub fn fit_with_classes<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<ClassifierModel<F>> {
    if x.rows() == 0 {
        return Err(TriageError::DegenerateData {
            detail: "cannot fit on zero rows".into(),
        });
    }
    if x.rows() != y.len() {
        return Err(TriageError::LengthMismatch {
            left: y.len(),
            right: x.rows(),
        });
    }
    if n_classes == 0 {
        return Err(TriageError::DegenerateData {
            detail: "need at least one class".into(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(TriageError::Invalid(format!(
            "label code {bad} outside 0..{n_classes}"
        )));
    }

    let mut scaler = None;
    let scaled;
    let x_fit: &FeatureMatrix<F> =
        if spec.algorithm.wants_scaling() && x.kind() == FeatureKind::Curated {
            let s = Standardizer::fit(x);
            scaled = s.transform(x)?;
            scaler = Some(s);
            &scaled
        } else {
            x
        };

    let state = match spec.algorithm {
        Algorithm::GaussianNb => {
            ModelState::Gaussian(naive_bayes::fit_gaussian(spec, x_fit, y, n_classes)?)
        }
        Algorithm::MultinomialNb => {
            ModelState::Multinomial(naive_bayes::fit_multinomial(spec, x_fit, y, n_classes)?)
        }
        Algorithm::LogisticRegression => {
            ModelState::Linear(linear::fit_softmax(spec, x_fit, y, n_classes)?)
        }
        Algorithm::LinearSvm => ModelState::Linear(linear::fit_hinge_ovr(spec, x_fit, y, n_classes)?),
        Algorithm::SgdLinear => {
            ModelState::Linear(linear::fit_logistic_ovr(spec, x_fit, y, n_classes)?)
        }
        Algorithm::Knn => ModelState::Knn(knn::fit_knn(spec, x_fit, y)?),
        Algorithm::DecisionTree => ModelState::Tree(tree::fit_decision_tree(spec, x_fit, y, n_classes)?),
        Algorithm::RandomForest => ModelState::Forest(tree::fit_forest(
            spec,
            x_fit,
            y,
            n_classes,
            tree::ForestFlavor::Random,
        )?),
        Algorithm::ExtraTrees => ModelState::Forest(tree::fit_forest(
            spec,
            x_fit,
            y,
            n_classes,
            tree::ForestFlavor::Extra,
        )?),
        Algorithm::BaggedTree => ModelState::Forest(tree::fit_forest(
            spec,
            x_fit,
            y,
            n_classes,
            tree::ForestFlavor::Bagged,
        )?),
        Algorithm::Boosted => ModelState::Boosted(boost::fit_boosted(spec, x_fit, y, n_classes)?),
        Algorithm::VotingSoft => {
            ModelState::Voting(ensemble::fit_voting(spec, x, y, n_classes, true)?)
        }
        Algorithm::VotingHard => {
            ModelState::Voting(ensemble::fit_voting(spec, x, y, n_classes, false)?)
        }
        Algorithm::Stacking => ModelState::Stacking(ensemble::fit_stacking_spec(spec, x, y, n_classes)?),
        Algorithm::OneVsRest => ModelState::OneVsRest(ensemble::fit_ovr(spec, x, y, n_classes)?),
        Algorithm::Mlp => ModelState::Mlp(mlp::fit_mlp(spec, x_fit, y, n_classes)?),
    };

    Ok(ClassifierModel {
        spec: spec.clone(),
        n_classes,
        column_names: x.column_names().to_vec(),
        scaler,
        state,
    })
}

impl<F: Scalar> ClassifierModel<F> {
    pub(crate) fn state(&self) -> &ModelState<F> {
        &self.state
    }

    fn check_schema(&self, x: &FeatureMatrix<F>) -> Result<()> {
        if x.column_names() != self.column_names.as_slice() {
            return Err(TriageError::SchemaMismatch {
                detail: format!(
                    "model expects {} columns, input has {}",
                    self.column_names.len(),
                    x.cols()
                ),
            });
        }
        Ok(())
    }

    /// Per-row class probabilities; every row sums to one.
    pub fn predict_proba(&self, x: &FeatureMatrix<F>) -> Result<Vec<Vec<F>>> {
        self.check_schema(x)?;
        match &self.scaler {
            Some(s) => {
                let scaled = s.transform(x)?;
                self.state.predict_proba(&scaled, self.n_classes)
            }
            None => self.state.predict_proba(x, self.n_classes),
        }
    }

    /// Predicted label codes: argmax of `predict_proba` with lowest-code
    /// tie-break.
    pub fn predict(&self, x: &FeatureMatrix<F>) -> Result<Vec<usize>> {
        Ok(self
            .predict_proba(x)?
            .iter()
            .map(|row| argmax_lowest(row))
            .collect())
    }
}

impl<F: Scalar> ModelState<F> {
    fn predict_proba(&self, x: &FeatureMatrix<F>, n_classes: usize) -> Result<Vec<Vec<F>>> {
        match self {
            ModelState::Gaussian(state) => Ok(state.predict_proba(x)),
            ModelState::Multinomial(state) => Ok(state.predict_proba(x)),
            ModelState::Linear(state) => Ok(state.predict_proba(x, n_classes)),
            ModelState::Knn(state) => Ok(state.predict_proba(x, n_classes)),
            ModelState::Tree(state) => Ok(state.predict_proba(x)),
            ModelState::Forest(state) => Ok(state.predict_proba(x, n_classes)),
            ModelState::Boosted(state) => Ok(state.predict_proba(x, n_classes)),
            ModelState::Voting(state) => state.predict_proba(x, n_classes),
            ModelState::Stacking(state) => state.predict_proba(x),
            ModelState::OneVsRest(state) => state.predict_proba(x, n_classes),
            ModelState::Mlp(state) => Ok(state.predict_proba(x)),
        }
    }
}

/// Internal constructor used by [`fit_stacking`] to wrap a prebuilt state.
pub(crate) fn assemble_model<F: Scalar>(
    spec: ModelSpec,
    n_classes: usize,
    column_names: Vec<String>,
    state: ModelState<F>,
) -> ClassifierModel<F> {
    ClassifierModel {
        spec,
        n_classes,
        column_names,
        scaler: None,
        state,
    }
}

/// Splitmix-style seed derivation for per-component RNG streams.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Numerically stable softmax in place.
pub(crate) fn softmax_in_place<F: Scalar>(scores: &mut [F]) {
    let mut max = scores[0];
    for &s in scores.iter().skip(1) {
        if s > max {
            max = s;
        }
    }
    let mut sum = F::zero();
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s = *s / sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;

    fn toy_matrix() -> FeatureMatrix<f64> {
        FeatureMatrix::from_rows(
            vec![
                vec![0.0, 1.0],
                vec![0.1, 0.9],
                vec![1.0, 0.0],
                vec![0.9, 0.1],
            ],
            vec!["a".into(), "b".into()],
            FeatureKind::Derived,
        )
        .unwrap()
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax_lowest(&[0.25, 0.25, 0.25, 0.25]), 0);
        assert_eq!(argmax_lowest(&[0.1, 0.45, 0.45]), 1);
        assert_eq!(argmax_lowest(&[0.2, 0.3, 0.5]), 2);
    }

    #[test]
    fn unknown_hyperparameter_is_rejected() {
        let spec = ModelSpec::new(Algorithm::Knn).with_int("bogus", 3);
        let x = toy_matrix();
        let err = fit(&spec, &x, &[0, 0, 1, 1]).unwrap_err();
        assert!(matches!(err, TriageError::BadHyperparameter { name, .. } if name == "bogus"));
    }

    #[test]
    fn zero_rows_is_degenerate() {
        let x = FeatureMatrix::from_rows(vec![], vec!["a".into()], FeatureKind::Derived).unwrap();
        let err = fit(&ModelSpec::new(Algorithm::GaussianNb), &x, &[]).unwrap_err();
        assert!(matches!(err, TriageError::DegenerateData { .. }));
    }

    #[test]
    fn schema_mismatch_is_detected() {
        let x = toy_matrix();
        let model = fit(&ModelSpec::new(Algorithm::GaussianNb), &x, &[0, 0, 1, 1]).unwrap();
        let other = FeatureMatrix::from_rows(
            vec![vec![1.0]],
            vec!["z".into()],
            FeatureKind::Derived,
        )
        .unwrap();
        assert!(matches!(
            model.predict(&other).unwrap_err(),
            TriageError::SchemaMismatch { .. }
        ));
    }

    #[test]
    fn single_class_training_always_predicts_it() {
        let x = toy_matrix();
        for algorithm in [
            Algorithm::GaussianNb,
            Algorithm::LogisticRegression,
            Algorithm::Knn,
            Algorithm::DecisionTree,
            Algorithm::RandomForest,
        ] {
            let model = fit(&ModelSpec::new(algorithm), &x, &[0, 0, 0, 0]).unwrap();
            let probs = model.predict_proba(&x).unwrap();
            for row in probs {
                assert_eq!(row.len(), 1);
                assert!((row[0] - 1.0).abs() < 1e-9, "{algorithm:?}");
            }
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ModelSpec::preset("stacking", 7).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ModelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
