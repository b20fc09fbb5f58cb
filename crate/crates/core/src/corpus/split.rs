//! Stratified fold planning for cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Result, TriageError};

/// K disjoint folds over record indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    /// False when a class had fewer members than `k` and the split fell
    /// back to a plain shuffle.
    pub stratified: bool,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Train indices (all folds but `fold`) and test indices (`fold`).
    pub fn train_test(&self, fold: usize) -> (Vec<usize>, &[usize]) {
        let mut train = Vec::new();
        for (i, f) in self.folds.iter().enumerate() {
            if i != fold {
                train.extend_from_slice(f);
            }
        }
        train.sort_unstable();
        (train, &self.folds[fold])
    }
}

/// Stratified split of a labeled dataset into `k` folds.
pub fn stratified_split(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    stratified_indices(&dataset.labels, k, seed)
}

/// Stratified split over raw label codes.
///
/// Every class is dealt round-robin into the folds after a seeded shuffle,
/// so per-fold class counts differ from an even share by at most one
/// sample. Classes smaller than `k` force a non-stratified fallback.
pub fn stratified_indices(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(TriageError::BadK { k, n });
    }

    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stratified = by_class.iter().all(|c| c.is_empty() || c.len() >= k);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];

    if stratified {
        let mut offset = 0usize;
        for class_indices in &by_class {
            let mut shuffled = class_indices.clone();
            shuffled.shuffle(&mut rng);
            for (i, idx) in shuffled.into_iter().enumerate() {
                folds[(i + offset) % k].push(idx);
            }
            offset = (offset + class_indices.len()) % k;
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        for (i, idx) in all.into_iter().enumerate() {
            folds[i % k].push(idx);
        }
    }

    for fold in &mut folds {
        fold.sort_unstable();
    }

    Ok(FoldPlan {
        folds,
        stratified,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_singletons() {
        let labels = vec![0usize; 10];
        // Single class of 10 members with k=10 stays stratified.
        let plan = stratified_indices(&labels, 10, 7).unwrap();
        assert!(plan.folds.iter().all(|f| f.len() == 1));
        assert!(plan.stratified);
    }

    #[test]
    fn balanced_two_class_folds_are_five_plus_five() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let plan = stratified_indices(&labels, 10, 123).unwrap();
        for fold in &plan.folds {
            assert_eq!(fold.len(), 10);
            let zeros = fold.iter().filter(|&&i| labels[i] == 0).count();
            assert_eq!(zeros, 5, "expected 5+5 per fold");
        }
    }

    #[test]
    fn same_seed_is_identical() {
        let labels: Vec<usize> = (0..57).map(|i| i % 3).collect();
        let a = stratified_indices(&labels, 5, 99).unwrap();
        let b = stratified_indices(&labels, 5, 99).unwrap();
        assert_eq!(a.folds, b.folds);
        let c = stratified_indices(&labels, 5, 100).unwrap();
        assert_ne!(a.folds, c.folds);
    }

    #[test]
    fn bad_k_is_rejected() {
        let labels = vec![0, 1, 0, 1];
        assert!(matches!(
            stratified_indices(&labels, 1, 0),
            Err(TriageError::BadK { .. })
        ));
        assert!(matches!(
            stratified_indices(&labels, 5, 0),
            Err(TriageError::BadK { .. })
        ));
    }

    #[test]
    fn tiny_class_falls_back_to_plain_shuffle() {
        let mut labels = vec![0usize; 20];
        labels.push(1); // class of one member, k=5
        let plan = stratified_indices(&labels, 5, 3).unwrap();
        assert!(!plan.stratified);
        let total: usize = plan.folds.iter().map(Vec::len).sum();
        assert_eq!(total, 21);
    }

    #[test]
    fn train_test_partition() {
        let labels: Vec<usize> = (0..30).map(|i| i % 2).collect();
        let plan = stratified_indices(&labels, 3, 5).unwrap();
        let (train, test) = plan.train_test(1);
        assert_eq!(train.len() + test.len(), 30);
        assert!(test.iter().all(|i| !train.contains(i)));
    }
}
