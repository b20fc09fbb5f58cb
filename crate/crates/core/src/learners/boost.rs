//! SAMME-style adaptive boosting over depth-limited CART trees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::learners::tree::{grow_tree, ColumnStore, MaxFeatures, TreeParams, TreeState};
use crate::learners::{ModelSpec, ParamReader};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct BoostedState<F> {
    pub trees: Vec<TreeState<F>>,
    pub alphas: Vec<F>,
}

pub(crate) fn fit_boosted<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<BoostedState<F>> {
    let reader = ParamReader::new(spec);
    let rounds = reader.usize("n_estimators", 50, 1)?;
    let max_depth = reader.depth("max_depth", Some(3))?;
    let min_samples_leaf = reader.usize("min_samples_leaf", 1, 1)?;
    reader.finish()?;

    let params = TreeParams {
        max_depth,
        min_samples_leaf,
        min_samples_split: 2,
        max_features: MaxFeatures::All,
        extra_random: false,
    };
    let n = x.rows();
    let store = ColumnStore::from_matrix(x);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k_term = ((n_classes.max(2) - 1) as f64).ln();

    let mut weights = vec![F::one() / F::from_count(n); n];
    let mut trees = Vec::new();
    let mut alphas: Vec<F> = Vec::new();

    for _ in 0..rounds {
        let rows: Vec<u32> = (0..n as u32).collect();
        let tree = grow_tree(&store, y, &weights, rows, n_classes, &params, &mut rng);
        let mut err = F::zero();
        let misses: Vec<bool> = (0..n as u32)
            .map(|r| {
                let miss = tree.predict_store(&store, r) != y[r as usize];
                if miss {
                    err += weights[r as usize];
                }
                miss
            })
            .collect();

        let err_f = err.as_f64();
        if err_f <= 1e-12 {
            // Perfect round: dominate the vote and stop.
            alphas.push(F::real((1.0 / 1e-12_f64).ln() + k_term));
            trees.push(tree);
            break;
        }
        // A learner no better than chance cannot be weighted; keep at
        // least one tree so the model stays total.
        if err_f >= 1.0 - 1.0 / n_classes.max(2) as f64 {
            if trees.is_empty() {
                alphas.push(F::one());
                trees.push(tree);
            }
            break;
        }
        let alpha = ((1.0 - err_f) / err_f).ln() + k_term;
        alphas.push(F::real(alpha));

        let bump = F::real(alpha.exp());
        let mut total = F::zero();
        for (w, miss) in weights.iter_mut().zip(&misses) {
            if *miss {
                *w = *w * bump;
            }
            total += *w;
        }
        for w in &mut weights {
            *w = *w / total;
        }
        trees.push(tree);
    }

    Ok(BoostedState { trees, alphas })
}

impl<F: Scalar> BoostedState<F> {
    /// Normalized alpha-weighted vote distribution.
    pub fn predict_proba(&self, x: &FeatureMatrix<F>, n_classes: usize) -> Vec<Vec<F>> {
        let total: F = self.alphas.iter().copied().sum();
        (0..x.rows())
            .map(|r| {
                let mut scores = vec![F::zero(); n_classes];
                for (tree, &alpha) in self.trees.iter().zip(&self.alphas) {
                    let dist = tree.proba_row(x, r);
                    scores[crate::learners::argmax_lowest(dist)] += alpha;
                }
                for s in &mut scores {
                    *s = *s / total;
                }
                scores
            })
            .collect()
    }

    /// Training error of the first `rounds` rounds, for monotonicity checks.
    pub fn staged_training_error(
        &self,
        x: &FeatureMatrix<F>,
        y: &[usize],
        rounds: usize,
    ) -> f64 {
        let rounds = rounds.min(self.trees.len());
        let mut wrong = 0usize;
        for r in 0..x.rows() {
            let mut scores = vec![F::zero(); self.trees[0].proba_row(x, 0).len()];
            for (tree, &alpha) in self.trees.iter().take(rounds).zip(&self.alphas) {
                let dist = tree.proba_row(x, r);
                scores[crate::learners::argmax_lowest(dist)] += alpha;
            }
            if crate::learners::argmax_lowest(&scores) != y[r] {
                wrong += 1;
            }
        }
        wrong as f64 / x.rows() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::{fit, Algorithm, ModelState};

    fn weakly_learnable() -> (FeatureMatrix<f64>, Vec<usize>) {
        // Two interleaved stripes that stumps cannot solve alone but a few
        // boosted stumps can.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let v = i as f64 / 4.0;
            rows.push(vec![v, (i % 3) as f64]);
            labels.push(usize::from(v.rem_euclid(4.0) < 2.0));
        }
        (
            FeatureMatrix::from_rows(rows, vec!["a".into(), "b".into()], FeatureKind::Derived)
                .unwrap(),
            labels,
        )
    }

    #[test]
    fn boosted_stumps_reach_zero_training_error() {
        let (x, y) = weakly_learnable();
        let spec = ModelSpec::new(Algorithm::Boosted)
            .with_int("max_depth", 1)
            .with_int("n_estimators", 60);
        let model = fit(&spec, &x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        assert_eq!(preds, y);
    }

    #[test]
    fn training_error_is_non_increasing_in_rounds() {
        let (x, y) = weakly_learnable();
        let spec = ModelSpec::new(Algorithm::Boosted)
            .with_int("max_depth", 1)
            .with_int("n_estimators", 40);
        let model = fit(&spec, &x, &y).unwrap();
        let ModelState::Boosted(state) = model.state() else {
            unreachable!()
        };
        let mut previous = f64::INFINITY;
        for rounds in 1..=state.trees.len() {
            let err = state.staged_training_error(&x, &y, rounds);
            assert!(
                err <= previous + 1e-12,
                "round {rounds}: error {err} rose above {previous}"
            );
            previous = err;
        }
    }
}
