//! Per-column standardization (mean zero, unit variance).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{FeatureKind, FeatureMatrix};
use crate::scalar::Scalar;

/// Column-wise standardizer fitted on a training matrix. Zero-variance
/// columns pass through as zeros after centering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer<F> {
    means: Vec<F>,
    stds: Vec<F>,
}

impl<F: Scalar> Standardizer<F> {
    pub fn fit(x: &FeatureMatrix<F>) -> Self {
        let n = F::from_count(x.rows().max(1));
        let cols = x.cols();
        let mut means = vec![F::zero(); cols];
        for r in 0..x.rows() {
            for (c, v) in x.row_entries(r) {
                means[c] += v;
            }
        }
        for m in &mut means {
            *m = *m / n;
        }
        let mut vars = vec![F::zero(); cols];
        let mut buf = vec![F::zero(); cols];
        for r in 0..x.rows() {
            x.write_row_dense(r, &mut buf);
            for c in 0..cols {
                let d = buf[c] - means[c];
                vars[c] += d * d;
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > F::zero() {
                    s
                } else {
                    F::one()
                }
            })
            .collect();
        Standardizer { means, stds }
    }

    /// Standardizes into a dense matrix tagged [`FeatureKind::Derived`].
    pub fn transform(&self, x: &FeatureMatrix<F>) -> Result<FeatureMatrix<F>> {
        let cols = x.cols();
        let mut rows = Vec::with_capacity(x.rows());
        let mut buf = vec![F::zero(); cols];
        for r in 0..x.rows() {
            x.write_row_dense(r, &mut buf);
            rows.push(
                (0..cols)
                    .map(|c| (buf[c] - self.means[c]) / self.stds[c])
                    .collect(),
            );
        }
        FeatureMatrix::from_rows(rows, x.column_names().to_vec(), FeatureKind::Derived)
    }

    pub fn means(&self) -> &[F] {
        &self.means
    }

    pub fn stds(&self) -> &[F] {
        &self.stds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizes_columns_and_keeps_constants_at_zero() {
        let x = FeatureMatrix::from_rows(
            vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]],
            vec!["a".into(), "b".into()],
            FeatureKind::Curated,
        )
        .unwrap();
        let s = Standardizer::fit(&x);
        let t = s.transform(&x).unwrap();
        let mean_a = (t.get(0, 0) + t.get(1, 0) + t.get(2, 0)) / 3.0;
        assert!(mean_a.abs() < 1e-12);
        for r in 0..3 {
            assert_eq!(t.get(r, 1), 0.0, "constant column centers to zero");
        }
        let var_a = (0..3).map(|r| t.get(r, 0).powi(2)).sum::<f64>() / 3.0;
        assert!((var_a - 1.0).abs() < 1e-12);
    }
}
