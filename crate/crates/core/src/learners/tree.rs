//! CART decision trees and tree ensembles.
//!
//! Splits minimize weighted Gini impurity over candidate thresholds placed
//! midway between consecutive distinct feature values (best-split search).
//! Extra trees instead draw one uniformly random boundary between
//! consecutive distinct values per candidate feature, which keeps every
//! tree model invariant under strictly increasing per-column transforms.
//! Sample weights support boosting; bootstrap row multisets support
//! bagging.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::learners::{derive_seed, ModelSpec, ParamReader};
use crate::scalar::Scalar;

/// Per-node feature subsampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(&self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(m) => (*m).min(d),
        }
        .max(1)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: Option<u32>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub extra_random: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
            extra_random: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum TreeNode<F> {
    Leaf {
        dist: Vec<F>,
    },
    Split {
        feature: u32,
        threshold: F,
        left: u32,
        right: u32,
    },
}

/// One fitted CART tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct TreeState<F> {
    pub nodes: Vec<TreeNode<F>>,
}

impl<F: Scalar> TreeState<F> {
    pub fn proba_row(&self, x: &FeatureMatrix<F>, row: usize) -> &[F] {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { dist } => return dist,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x.get(row, *feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Predicted class for a training row addressed through the column
    /// store (used by boosting).
    pub(crate) fn predict_store(&self, store: &ColumnStore<F>, row: u32) -> usize {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { dist } => return crate::learners::argmax_lowest(dist),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if store.value(*feature as usize, row) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn predict_proba(&self, x: &FeatureMatrix<F>) -> Vec<Vec<F>> {
        (0..x.rows()).map(|r| self.proba_row(x, r).to_vec()).collect()
    }
}

/// Column-major view of a feature matrix for split search.
pub(crate) struct ColumnStore<F> {
    n_rows: usize,
    columns: Vec<Col<F>>,
}

enum Col<F> {
    Dense(Vec<F>),
    Sparse { rows: Vec<u32>, values: Vec<F> },
}

impl<F: Scalar> ColumnStore<F> {
    pub fn from_matrix(x: &FeatureMatrix<F>) -> Self {
        let n_rows = x.rows();
        let d = x.cols();
        if x.is_sparse() {
            let mut rows: Vec<Vec<u32>> = vec![Vec::new(); d];
            let mut values: Vec<Vec<F>> = vec![Vec::new(); d];
            for r in 0..n_rows {
                for (c, v) in x.row_entries(r) {
                    rows[c].push(r as u32);
                    values[c].push(v);
                }
            }
            ColumnStore {
                n_rows,
                columns: rows
                    .into_iter()
                    .zip(values)
                    .map(|(rows, values)| Col::Sparse { rows, values })
                    .collect(),
            }
        } else {
            let mut columns = vec![Vec::with_capacity(n_rows); d];
            for r in 0..n_rows {
                for (c, v) in x.row_entries(r) {
                    columns[c].push(v);
                }
            }
            ColumnStore {
                n_rows,
                columns: columns.into_iter().map(Col::Dense).collect(),
            }
        }
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn value(&self, col: usize, row: u32) -> F {
        match &self.columns[col] {
            Col::Dense(values) => values[row as usize],
            Col::Sparse { rows, values } => match rows.binary_search(&row) {
                Ok(i) => values[i],
                Err(_) => F::zero(),
            },
        }
    }
}

fn gini<F: Scalar>(counts: &[F], total: F) -> F {
    if total <= F::zero() {
        return F::zero();
    }
    let mut acc = F::zero();
    for &c in counts {
        let p = c / total;
        acc += p * p;
    }
    F::one() - acc
}

struct WorkItem {
    rows: Vec<u32>,
    depth: u32,
    slot: u32,
}

/// Grows one tree over the (possibly multiset) row list.
pub(crate) fn grow_tree<F: Scalar>(
    store: &ColumnStore<F>,
    y: &[usize],
    sample_weights: &[F],
    rows: Vec<u32>,
    n_classes: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> TreeState<F> {
    let d = store.n_cols();
    let m_features = params.max_features.resolve(d);
    let mut nodes: Vec<TreeNode<F>> = vec![TreeNode::Leaf { dist: Vec::new() }];
    let mut stack = vec![WorkItem {
        rows,
        depth: 0,
        slot: 0,
    }];
    let mut feature_pool: Vec<u32> = (0..d as u32).collect();
    let mut gathered: Vec<(F, usize, F)> = Vec::new();

    while let Some(WorkItem { rows, depth, slot }) = stack.pop() {
        let mut counts = vec![F::zero(); n_classes];
        let mut total_w = F::zero();
        for &r in &rows {
            let w = sample_weights[r as usize];
            counts[y[r as usize]] += w;
            total_w += w;
        }
        let n_here = rows.len();
        let n_nonzero_classes = counts.iter().filter(|&&c| c > F::zero()).count();
        let depth_done = params.max_depth.is_some_and(|m| depth >= m);
        if n_nonzero_classes <= 1
            || depth_done
            || n_here < params.min_samples_split
            || n_here < 2 * params.min_samples_leaf
        {
            nodes[slot as usize] = leaf(counts, total_w);
            continue;
        }

        let parent_gini = gini(&counts, total_w);
        // Candidate features: handed over in index order when every feature
        // participates, otherwise a seeded partial Fisher-Yates draw.
        let candidates: &[u32] = if m_features >= d {
            &feature_pool
        } else {
            for i in 0..m_features {
                let j = rng.gen_range(i..d);
                feature_pool.swap(i, j);
            }
            &feature_pool[..m_features]
        };

        let mut best: Option<(F, u32, F)> = None;
        for &feature in candidates {
            gathered.clear();
            for &r in &rows {
                gathered.push((
                    store.value(feature as usize, r),
                    y[r as usize],
                    sample_weights[r as usize],
                ));
            }
            gathered.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
            if params.extra_random {
                let boundaries: Vec<usize> = (0..gathered.len() - 1)
                    .filter(|&i| gathered[i].0 < gathered[i + 1].0)
                    .collect();
                if boundaries.is_empty() {
                    continue;
                }
                let b = boundaries[rng.gen_range(0..boundaries.len())];
                let threshold = (gathered[b].0 + gathered[b + 1].0) / F::real(2.0);
                if let Some(candidate) =
                    score_threshold(&gathered, threshold, &counts, total_w, parent_gini, params)
                {
                    if best.is_none() || candidate > best.as_ref().expect("set").0 {
                        best = Some((candidate, feature, threshold));
                    }
                }
            } else {
                let mut left_counts = vec![F::zero(); n_classes];
                let mut left_w = F::zero();
                for i in 0..gathered.len() - 1 {
                    let (v, class, w) = gathered[i];
                    left_counts[class] += w;
                    left_w += w;
                    let v_next = gathered[i + 1].0;
                    if v >= v_next {
                        continue;
                    }
                    let n_left = i + 1;
                    let n_right = gathered.len() - n_left;
                    if n_left < params.min_samples_leaf || n_right < params.min_samples_leaf {
                        continue;
                    }
                    let right_w = total_w - left_w;
                    let mut right_counts = counts.clone();
                    for (rc, lc) in right_counts.iter_mut().zip(&left_counts) {
                        *rc = *rc - *lc;
                    }
                    let child_impurity = (left_w * gini(&left_counts, left_w)
                        + right_w * gini(&right_counts, right_w))
                        / total_w;
                    let gain = parent_gini - child_impurity;
                    if gain > F::zero()
                        && (best.is_none() || gain > best.as_ref().expect("set").0)
                    {
                        let threshold = (v + v_next) / F::real(2.0);
                        best = Some((gain, feature, threshold));
                    }
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            nodes[slot as usize] = leaf(counts, total_w);
            continue;
        };
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
            .iter()
            .partition(|&&r| store.value(feature as usize, r) <= threshold);
        if left_rows.is_empty() || right_rows.is_empty() {
            nodes[slot as usize] = leaf(counts, total_w);
            continue;
        }
        let left_slot = nodes.len() as u32;
        nodes.push(TreeNode::Leaf { dist: Vec::new() });
        let right_slot = nodes.len() as u32;
        nodes.push(TreeNode::Leaf { dist: Vec::new() });
        nodes[slot as usize] = TreeNode::Split {
            feature,
            threshold,
            left: left_slot,
            right: right_slot,
        };
        stack.push(WorkItem {
            rows: right_rows,
            depth: depth + 1,
            slot: right_slot,
        });
        stack.push(WorkItem {
            rows: left_rows,
            depth: depth + 1,
            slot: left_slot,
        });
    }

    TreeState { nodes }
}

fn leaf<F: Scalar>(mut counts: Vec<F>, total: F) -> TreeNode<F> {
    if total > F::zero() {
        for c in &mut counts {
            *c = *c / total;
        }
    }
    TreeNode::Leaf { dist: counts }
}

/// Gain for an extra-trees random threshold; respects min-leaf counts.
fn score_threshold<F: Scalar>(
    gathered: &[(F, usize, F)],
    threshold: F,
    counts: &[F],
    total_w: F,
    parent_gini: F,
    params: &TreeParams,
) -> Option<F> {
    let mut left_counts = vec![F::zero(); counts.len()];
    let mut left_w = F::zero();
    let mut n_left = 0usize;
    for &(v, class, w) in gathered {
        if v <= threshold {
            left_counts[class] += w;
            left_w += w;
            n_left += 1;
        }
    }
    let n_right = gathered.len() - n_left;
    if n_left < params.min_samples_leaf || n_right < params.min_samples_leaf {
        return None;
    }
    let right_w = total_w - left_w;
    let mut right_counts = counts.to_vec();
    for (rc, lc) in right_counts.iter_mut().zip(&left_counts) {
        *rc = *rc - *lc;
    }
    let child = (left_w * gini(&left_counts, left_w) + right_w * gini(&right_counts, right_w))
        / total_w;
    let gain = parent_gini - child;
    (gain > F::zero()).then_some(gain)
}

fn tree_params_from(
    reader: &ParamReader<'_>,
    default_max_features: MaxFeatures,
    extra_random: bool,
) -> Result<TreeParams> {
    Ok(TreeParams {
        max_depth: reader.depth("max_depth", None)?,
        min_samples_leaf: reader.usize("min_samples_leaf", 1, 1)?,
        min_samples_split: reader.usize("min_samples_split", 2, 2)?,
        max_features: reader.max_features("max_features", default_max_features)?,
        extra_random,
    })
}

pub(crate) fn fit_decision_tree<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<TreeState<F>> {
    let reader = ParamReader::new(spec);
    let params = tree_params_from(&reader, MaxFeatures::All, false)?;
    reader.finish()?;
    let store = ColumnStore::from_matrix(x);
    let weights = vec![F::one(); x.rows()];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows: Vec<u32> = (0..x.rows() as u32).collect();
    Ok(grow_tree(
        &store, y, &weights, rows, n_classes, &params, &mut rng,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ForestFlavor {
    Random,
    Extra,
    Bagged,
}

/// A collection of trees averaged by leaf distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ForestState<F> {
    pub trees: Vec<TreeState<F>>,
}

pub(crate) fn fit_forest<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    flavor: ForestFlavor,
) -> Result<ForestState<F>> {
    let reader = ParamReader::new(spec);
    let default_estimators = match flavor {
        ForestFlavor::Random | ForestFlavor::Extra => 100,
        ForestFlavor::Bagged => 50,
    };
    let n_estimators = reader.usize("n_estimators", default_estimators, 1)?;
    let default_bootstrap = matches!(flavor, ForestFlavor::Random | ForestFlavor::Bagged);
    let bootstrap = reader.flag("bootstrap", default_bootstrap)?;
    let default_features = match flavor {
        ForestFlavor::Random | ForestFlavor::Extra => MaxFeatures::Sqrt,
        ForestFlavor::Bagged => MaxFeatures::All,
    };
    let params = tree_params_from(&reader, default_features, flavor == ForestFlavor::Extra)?;
    reader.finish()?;

    let store = ColumnStore::from_matrix(x);
    let weights = vec![F::one(); x.rows()];
    let n = x.rows();
    let trees: Vec<TreeState<F>> = (0..n_estimators)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, i as u64));
            let rows: Vec<u32> = if bootstrap {
                let mut sampled: Vec<u32> =
                    (0..n).map(|_| rng.gen_range(0..n) as u32).collect();
                sampled.sort_unstable();
                sampled
            } else {
                (0..n as u32).collect()
            };
            grow_tree(&store, y, &weights, rows, n_classes, &params, &mut rng)
        })
        .collect();
    Ok(ForestState { trees })
}

impl<F: Scalar> ForestState<F> {
    pub fn predict_proba(&self, x: &FeatureMatrix<F>, n_classes: usize) -> Vec<Vec<F>> {
        let n_trees = F::from_count(self.trees.len());
        (0..x.rows())
            .map(|r| {
                let mut acc = vec![F::zero(); n_classes];
                for tree in &self.trees {
                    for (slot, p) in tree.proba_row(x, r).iter().enumerate() {
                        acc[slot] += *p;
                    }
                }
                for a in &mut acc {
                    *a = *a / n_trees;
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::{fit, Algorithm, ModelSpec};

    fn consistent_data() -> (FeatureMatrix<f64>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let a = (i % 6) as f64;
            let b = (i % 5) as f64 * 0.7;
            rows.push(vec![a, b, (i as f64 * 0.31).sin()]);
            labels.push(if a + b > 4.0 { 1 } else { 0 });
        }
        (
            FeatureMatrix::from_rows(
                rows,
                vec!["a".into(), "b".into(), "c".into()],
                FeatureKind::Derived,
            )
            .unwrap(),
            labels,
        )
    }

    #[test]
    fn unbounded_tree_fits_consistent_data_perfectly() {
        let (x, y) = consistent_data();
        let model = fit(&ModelSpec::new(Algorithm::DecisionTree), &x, &y).unwrap();
        assert_eq!(model.predict(&x).unwrap(), y);
    }

    #[test]
    fn max_depth_one_is_a_stump() {
        let (x, y) = consistent_data();
        let spec = ModelSpec::new(Algorithm::DecisionTree).with_int("max_depth", 1);
        let model = fit(&spec, &x, &y).unwrap();
        // A stump cannot be perfect on this data but must beat chance.
        let preds = model.predict(&x).unwrap();
        let correct = preds.iter().zip(&y).filter(|(p, t)| p == t).count();
        assert!(correct > y.len() / 2);
    }

    #[test]
    fn single_tree_forest_without_randomness_equals_decision_tree() {
        let (x, y) = consistent_data();
        let dt = fit(&ModelSpec::new(Algorithm::DecisionTree), &x, &y).unwrap();
        let rf = fit(
            &ModelSpec::new(Algorithm::RandomForest)
                .with_int("n_estimators", 1)
                .with_flag("bootstrap", false)
                .with_text("max_features", "all"),
            &x,
            &y,
        )
        .unwrap();
        assert_eq!(dt.predict(&x).unwrap(), rf.predict(&x).unwrap());
        assert_eq!(dt.predict_proba(&x).unwrap(), rf.predict_proba(&x).unwrap());
    }

    #[test]
    fn forests_fit_consistent_data() {
        let (x, y) = consistent_data();
        for algorithm in [
            Algorithm::RandomForest,
            Algorithm::ExtraTrees,
            Algorithm::BaggedTree,
        ] {
            let spec = ModelSpec::new(algorithm).with_int("n_estimators", 30);
            let model = fit(&spec, &x, &y).unwrap();
            let preds = model.predict(&x).unwrap();
            let correct = preds.iter().zip(&y).filter(|(p, t)| p == t).count();
            assert!(
                correct as f64 >= 0.9 * y.len() as f64,
                "{algorithm:?} underfits"
            );
        }
    }

    #[test]
    fn sparse_and_dense_storage_grow_identical_trees() {
        let (x, y) = consistent_data();
        let mut sparse_rows = Vec::new();
        for r in 0..x.rows() {
            sparse_rows.push(
                x.row_entries(r)
                    .filter(|(_, v)| *v != 0.0)
                    .map(|(c, v)| (c as u32, v))
                    .collect::<Vec<_>>(),
            );
        }
        let xs = FeatureMatrix::from_sparse_rows(
            sparse_rows,
            x.column_names().to_vec(),
            FeatureKind::Text,
        )
        .unwrap();
        let spec = ModelSpec::new(Algorithm::DecisionTree);
        let dense_model = fit(&spec, &x, &y).unwrap();
        let sparse_model = fit(&spec, &xs, &y).unwrap();
        // Column names differ in kind only; compare predictions on the
        // matching matrices.
        assert_eq!(
            dense_model.predict(&x).unwrap(),
            sparse_model.predict(&xs).unwrap()
        );
    }

    #[test]
    fn tree_predictions_invariant_under_monotone_transforms() {
        let (x, y) = consistent_data();
        let transformed_rows: Vec<Vec<f64>> = (0..x.rows())
            .map(|r| {
                (0..x.cols())
                    .map(|c| {
                        let v = x.get(r, c);
                        // Strictly increasing map per column.
                        match c {
                            0 => v.exp(),
                            1 => 3.0 * v + 7.0,
                            _ => v.powi(3) + 0.5 * v,
                        }
                    })
                    .collect()
            })
            .collect();
        let xt = FeatureMatrix::from_rows(
            transformed_rows,
            x.column_names().to_vec(),
            FeatureKind::Derived,
        )
        .unwrap();
        let specs = [
            ModelSpec::new(Algorithm::DecisionTree),
            ModelSpec::new(Algorithm::RandomForest).with_int("n_estimators", 15),
            ModelSpec::new(Algorithm::ExtraTrees).with_int("n_estimators", 15),
        ];
        for spec in specs {
            let plain = fit(&spec, &x, &y).unwrap().predict(&x).unwrap();
            let transformed = fit(&spec, &xt, &y).unwrap().predict(&xt).unwrap();
            assert_eq!(
                plain, transformed,
                "{:?} not threshold-invariant",
                spec.algorithm
            );
        }
    }
}
