//! Gaussian and multinomial naive Bayes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};
use crate::features::FeatureMatrix;
use crate::learners::{softmax_in_place, ModelSpec, ParamReader};
use crate::scalar::Scalar;

/// Gaussian naive Bayes: per-class feature means and floored variances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GaussianNbState<F> {
    priors: Vec<F>,
    means: Vec<Vec<F>>,
    vars: Vec<Vec<F>>,
}

pub(crate) fn fit_gaussian<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<GaussianNbState<F>> {
    let reader = ParamReader::new(spec);
    let var_smoothing = reader.float("var_smoothing", 1e-9, 0.0)?;
    reader.finish()?;

    let n = x.rows();
    let d = x.cols();
    let mut counts = vec![0usize; n_classes];
    let mut means = vec![vec![F::zero(); d]; n_classes];
    for r in 0..n {
        counts[y[r]] += 1;
        for (c, v) in x.row_entries(r) {
            means[y[r]][c] += v;
        }
    }
    for (class, count) in counts.iter().enumerate() {
        if *count > 0 {
            let denom = F::from_count(*count);
            for m in &mut means[class] {
                *m = *m / denom;
            }
        }
    }

    let mut vars = vec![vec![F::zero(); d]; n_classes];
    let mut buf = vec![F::zero(); d];
    for r in 0..n {
        x.write_row_dense(r, &mut buf);
        let class = y[r];
        for c in 0..d {
            let diff = buf[c] - means[class][c];
            vars[class][c] += diff * diff;
        }
    }
    // Variance floor: fraction of the largest global feature variance.
    let mut global_mean = vec![F::zero(); d];
    for r in 0..n {
        for (c, v) in x.row_entries(r) {
            global_mean[c] += v;
        }
    }
    let nf = F::from_count(n);
    for m in &mut global_mean {
        *m = *m / nf;
    }
    let mut max_var = F::zero();
    for c in 0..d {
        let mut acc = F::zero();
        for r in 0..n {
            let diff = x.get(r, c) - global_mean[c];
            acc += diff * diff;
        }
        let var = acc / nf;
        if var > max_var {
            max_var = var;
        }
    }
    let floor = {
        let eps = F::real(var_smoothing);
        if max_var > F::zero() {
            eps * max_var
        } else {
            eps
        }
    };
    for (class, count) in counts.iter().enumerate() {
        let denom = F::from_count((*count).max(1));
        for v in &mut vars[class] {
            *v = (*v / denom).max(floor);
        }
    }

    let priors = counts
        .iter()
        .map(|&c| F::from_count(c) / F::from_count(n))
        .collect();
    Ok(GaussianNbState {
        priors,
        means,
        vars,
    })
}

impl<F: Scalar> GaussianNbState<F> {
    pub fn predict_proba(&self, x: &FeatureMatrix<F>) -> Vec<Vec<F>> {
        let d = x.cols();
        let half = F::real(0.5);
        let two_pi = F::real(std::f64::consts::TAU);
        let mut buf = vec![F::zero(); d];
        (0..x.rows())
            .map(|r| {
                x.write_row_dense(r, &mut buf);
                let mut scores: Vec<F> = self
                    .priors
                    .iter()
                    .enumerate()
                    .map(|(class, &prior)| {
                        if prior <= F::zero() {
                            return F::real(-1e300);
                        }
                        let mut log_like = prior.ln();
                        for c in 0..d {
                            let var = self.vars[class][c];
                            let diff = buf[c] - self.means[class][c];
                            log_like = log_like
                                - half * (two_pi * var).ln()
                                - half * diff * diff / var;
                        }
                        log_like
                    })
                    .collect();
                softmax_in_place(&mut scores);
                scores
            })
            .collect()
    }
}

/// Multinomial naive Bayes with Laplace smoothing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MultinomialNbState<F> {
    priors: Vec<F>,
    /// Per-class feature probability simplex (smoothed).
    theta: Vec<Vec<F>>,
}

pub(crate) fn fit_multinomial<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<MultinomialNbState<F>> {
    let reader = ParamReader::new(spec);
    let alpha = reader.float("alpha", 1.0, 0.0)?;
    reader.finish()?;

    let d = x.cols();
    for r in 0..x.rows() {
        for (c, v) in x.row_entries(r) {
            if v < F::zero() {
                return Err(TriageError::NegativeFeatureForMultinomialNb {
                    row: r,
                    column: x.column_names()[c].clone(),
                    value: v.as_f64(),
                });
            }
        }
    }

    let mut counts = vec![0usize; n_classes];
    let mut feature_totals = vec![vec![F::zero(); d]; n_classes];
    for r in 0..x.rows() {
        counts[y[r]] += 1;
        for (c, v) in x.row_entries(r) {
            feature_totals[y[r]][c] += v;
        }
    }

    let alpha_f = F::real(alpha);
    let theta = feature_totals
        .iter()
        .map(|totals| {
            let total: F = totals.iter().copied().sum();
            let denom = total + alpha_f * F::from_count(d);
            totals.iter().map(|&t| (t + alpha_f) / denom).collect()
        })
        .collect();
    let priors = counts
        .iter()
        .map(|&c| F::from_count(c) / F::from_count(x.rows()))
        .collect();
    Ok(MultinomialNbState { priors, theta })
}

impl<F: Scalar> MultinomialNbState<F> {
    pub fn predict_proba(&self, x: &FeatureMatrix<F>) -> Vec<Vec<F>> {
        (0..x.rows())
            .map(|r| {
                let mut scores: Vec<F> = self
                    .priors
                    .iter()
                    .enumerate()
                    .map(|(class, &prior)| {
                        if prior <= F::zero() {
                            return F::real(-1e300);
                        }
                        let mut score = prior.ln();
                        for (c, v) in x.row_entries(r) {
                            score += v * self.theta[class][c].ln();
                        }
                        score
                    })
                    .collect();
                softmax_in_place(&mut scores);
                scores
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::{fit, Algorithm};

    #[test]
    fn gaussian_symmetric_posterior_is_half() {
        // Two points per class, symmetric around the query.
        let x = FeatureMatrix::from_rows(
            vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]],
            vec!["f".into()],
            FeatureKind::Derived,
        )
        .unwrap();
        let model = fit(&ModelSpec::new(Algorithm::GaussianNb), &x, &[0, 0, 1, 1]).unwrap();
        let q = FeatureMatrix::from_rows(vec![vec![0.0]], vec!["f".into()], FeatureKind::Derived)
            .unwrap();
        let probs = model.predict_proba(&q).unwrap();
        assert!((probs[0][0] - 0.5).abs() < 1e-9);
        assert!((probs[0][1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn multinomial_matches_hand_bayes_posteriors() {
        // Two docs per class with feature-count rows; query [1, 1].
        // Hand computation with alpha = 1:
        //   class 0 totals [3, 1] -> theta0 = [4/6, 2/6]
        //   class 1 totals [1, 4] -> theta1 = [2/7, 5/7]
        //   score0 = 0.5 * (4/6) * (2/6) = 1/9
        //   score1 = 0.5 * (2/7) * (5/7) = 5/49
        //   posterior0 = 49/94, posterior1 = 45/94
        let x = FeatureMatrix::from_rows(
            vec![
                vec![2.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 2.0],
                vec![1.0, 2.0],
            ],
            vec!["t0".into(), "t1".into()],
            FeatureKind::Text,
        )
        .unwrap();
        let model = fit(&ModelSpec::new(Algorithm::MultinomialNb), &x, &[0, 0, 1, 1]).unwrap();
        let q = FeatureMatrix::from_rows(
            vec![vec![1.0, 1.0]],
            vec!["t0".into(), "t1".into()],
            FeatureKind::Text,
        )
        .unwrap();
        let probs = model.predict_proba(&q).unwrap();
        assert!((probs[0][0] - 49.0 / 94.0).abs() < 1e-9);
        assert!((probs[0][1] - 45.0 / 94.0).abs() < 1e-9);
    }

    #[test]
    fn multinomial_rejects_negative_features() {
        let x = FeatureMatrix::from_rows(
            vec![vec![1.0], vec![-0.5]],
            vec!["t".into()],
            FeatureKind::Text,
        )
        .unwrap();
        let err = fit(&ModelSpec::new(Algorithm::MultinomialNb), &x, &[0, 1]).unwrap_err();
        assert!(matches!(
            err,
            TriageError::NegativeFeatureForMultinomialNb { row: 1, .. }
        ));
    }
}
