//! k-nearest neighbors with heap-based top-k selection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::learners::{ModelSpec, ParamReader};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct KnnState<F: Scalar> {
    pub k: usize,
    pub x: FeatureMatrix<F>,
    pub y: Vec<usize>,
    norms: Vec<F>,
}

/// `(distance², index)` with a total order; ties in distance prefer the
/// lower training index.
struct Neighbor<F>(F, usize);

impl<F: Scalar> PartialEq for Neighbor<F> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 && self.1 == other.1
    }
}
impl<F: Scalar> Eq for Neighbor<F> {}
impl<F: Scalar> PartialOrd for Neighbor<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Scalar> Ord for Neighbor<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("finite distances")
            .then(self.1.cmp(&other.1))
    }
}

pub(crate) fn fit_knn<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
) -> Result<KnnState<F>> {
    let reader = ParamReader::new(spec);
    let k = reader.usize("k", 5, 1)?;
    reader.finish()?;
    let norms = (0..x.rows()).map(|r| x.row_norm_sq(r)).collect();
    Ok(KnnState {
        k: k.min(x.rows()),
        x: x.clone(),
        y: y.to_vec(),
        norms,
    })
}

impl<F: Scalar> KnnState<F> {
    pub fn predict_proba(&self, queries: &FeatureMatrix<F>, n_classes: usize) -> Vec<Vec<F>> {
        (0..queries.rows())
            .map(|q| {
                let query_norm = queries.row_norm_sq(q);
                // Max-heap of the k smallest (distance, index) pairs.
                let mut heap: BinaryHeap<Neighbor<F>> = BinaryHeap::with_capacity(self.k + 1);
                for t in 0..self.x.rows() {
                    let two = F::real(2.0);
                    let dist = query_norm + self.norms[t]
                        - two * queries.dot_rows(q, &self.x, t);
                    let candidate = Neighbor(dist, t);
                    if heap.len() < self.k {
                        heap.push(candidate);
                    } else if candidate < *heap.peek().expect("non-empty heap") {
                        heap.pop();
                        heap.push(candidate);
                    }
                }
                let mut votes = vec![F::zero(); n_classes];
                let count = F::from_count(heap.len().max(1));
                for Neighbor(_, idx) in heap {
                    votes[self.y[idx]] += F::one();
                }
                for v in &mut votes {
                    *v = *v / count;
                }
                votes
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::{fit, Algorithm};

    fn plane() -> (FeatureMatrix<f64>, Vec<usize>) {
        (
            FeatureMatrix::from_rows(
                vec![
                    vec![0.0, 0.0],
                    vec![0.0, 1.0],
                    vec![1.0, 0.0],
                    vec![5.0, 5.0],
                    vec![5.0, 6.0],
                ],
                vec!["a".into(), "b".into()],
                FeatureKind::Derived,
            )
            .unwrap(),
            vec![0, 0, 0, 1, 1],
        )
    }

    #[test]
    fn exact_duplicate_wins_with_k1() {
        let (x, y) = plane();
        let spec = ModelSpec::new(Algorithm::Knn).with_int("k", 1);
        let model = fit(&spec, &x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        assert_eq!(preds, y);
    }

    #[test]
    fn k3_matches_exhaustive_sort_oracle() {
        let (x, y) = plane();
        let spec = ModelSpec::new(Algorithm::Knn).with_int("k", 3);
        let model = fit(&spec, &x, &y).unwrap();
        let query = FeatureMatrix::from_rows(
            vec![vec![4.0, 4.0]],
            vec!["a".into(), "b".into()],
            FeatureKind::Derived,
        )
        .unwrap();

        // Oracle: full distance sort.
        let mut distances: Vec<(f64, usize)> = (0..x.rows())
            .map(|t| {
                let dx = 4.0 - x.get(t, 0);
                let dy = 4.0 - x.get(t, 1);
                (dx * dx + dy * dy, t)
            })
            .collect();
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut votes = [0usize; 2];
        for (_, idx) in &distances[..3] {
            votes[y[*idx]] += 1;
        }
        let oracle = if votes[0] >= votes[1] { 0 } else { 1 };

        assert_eq!(model.predict(&query).unwrap()[0], oracle);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        // Two training points equidistant from the query but with
        // different labels; k = 1 must pick the lower index.
        let x = FeatureMatrix::from_rows(
            vec![vec![1.0], vec![-1.0]],
            vec!["a".into()],
            FeatureKind::Derived,
        )
        .unwrap();
        let model = fit(&ModelSpec::new(Algorithm::Knn).with_int("k", 1), &x, &[1, 0]).unwrap();
        let q = FeatureMatrix::from_rows(vec![vec![0.0]], vec!["a".into()], FeatureKind::Derived)
            .unwrap();
        assert_eq!(model.predict(&q).unwrap()[0], 1, "index 0 carries label 1");
    }
}
