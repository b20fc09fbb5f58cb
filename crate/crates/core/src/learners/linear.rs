//! Gradient-trained linear models.
//!
//! Logistic regression is multinomial softmax trained by deterministic
//! full-batch gradient descent. The linear SVM is one-vs-rest L2-regularized
//! hinge loss trained by epoch-ordered SGD (per-epoch shuffle from the
//! seed); `SgdLinear` is the same optimizer with log loss. SVM probabilities
//! are a softmax over margins and are documented as uncalibrated.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::learners::{softmax_in_place, ModelSpec, ParamReader};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) enum LinearKind {
    Softmax,
    HingeOvr,
    LogisticOvr,
}

/// Weights laid out per class as `d` coefficients plus a bias.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LinearState<F> {
    pub kind: LinearKind,
    pub weights: Vec<F>,
    pub d: usize,
}

impl<F: Scalar> LinearState<F> {
    fn stride(&self) -> usize {
        self.d + 1
    }

    fn margin(&self, x: &FeatureMatrix<F>, row: usize, class: usize) -> F {
        let w = &self.weights[class * self.stride()..(class + 1) * self.stride()];
        x.dot_row(row, &w[..self.d]) + w[self.d]
    }

    pub fn predict_proba(&self, x: &FeatureMatrix<F>, n_classes: usize) -> Vec<Vec<F>> {
        (0..x.rows())
            .map(|r| {
                let mut scores: Vec<F> = (0..n_classes).map(|c| self.margin(x, r, c)).collect();
                match self.kind {
                    LinearKind::Softmax | LinearKind::HingeOvr => softmax_in_place(&mut scores),
                    LinearKind::LogisticOvr => {
                        let mut sum = F::zero();
                        for s in scores.iter_mut() {
                            *s = F::one() / (F::one() + (-*s).exp());
                            sum += *s;
                        }
                        if sum > F::zero() {
                            for s in scores.iter_mut() {
                                *s = *s / sum;
                            }
                        } else {
                            let u = F::one() / F::from_count(n_classes);
                            scores.iter_mut().for_each(|s| *s = u);
                        }
                    }
                }
                scores
            })
            .collect()
    }
}

/// Full-batch softmax cross-entropy objective. Public so gradients can be
/// verified against finite differences.
pub struct SoftmaxObjective<'a, F: Scalar> {
    pub x: &'a FeatureMatrix<F>,
    pub y: &'a [usize],
    pub n_classes: usize,
    /// L2 strength on the non-bias coefficients.
    pub l2: F,
}

impl<F: Scalar> SoftmaxObjective<'_, F> {
    pub fn dim(&self) -> usize {
        self.n_classes * (self.x.cols() + 1)
    }

    fn scores(&self, weights: &[F], row: usize) -> Vec<F> {
        let d = self.x.cols();
        (0..self.n_classes)
            .map(|c| {
                let w = &weights[c * (d + 1)..(c + 1) * (d + 1)];
                self.x.dot_row(row, &w[..d]) + w[d]
            })
            .collect()
    }

    pub fn loss(&self, weights: &[F]) -> F {
        let n = F::from_count(self.x.rows());
        let mut total = F::zero();
        for r in 0..self.x.rows() {
            let mut scores = self.scores(weights, r);
            softmax_in_place(&mut scores);
            total -= scores[self.y[r]].max(F::real(1e-300)).ln();
        }
        let d = self.x.cols();
        let mut reg = F::zero();
        for c in 0..self.n_classes {
            for j in 0..d {
                let w = weights[c * (d + 1) + j];
                reg += w * w;
            }
        }
        total / n + self.l2 * reg / F::real(2.0)
    }

    pub fn grad(&self, weights: &[F]) -> Vec<F> {
        let d = self.x.cols();
        let n = F::from_count(self.x.rows());
        let mut grad = vec![F::zero(); self.dim()];
        for r in 0..self.x.rows() {
            let mut probs = self.scores(weights, r);
            softmax_in_place(&mut probs);
            for c in 0..self.n_classes {
                let mut coef = probs[c];
                if c == self.y[r] {
                    coef -= F::one();
                }
                coef = coef / n;
                let base = c * (d + 1);
                for (j, v) in self.x.row_entries(r) {
                    grad[base + j] += coef * v;
                }
                grad[base + d] += coef;
            }
        }
        for c in 0..self.n_classes {
            for j in 0..d {
                let idx = c * (d + 1) + j;
                grad[idx] += self.l2 * weights[idx];
            }
        }
        grad
    }
}

/// Full-batch binary hinge objective over ±1 labels; subgradient away from
/// the hinge kink.
pub struct HingeObjective<'a, F: Scalar> {
    pub x: &'a FeatureMatrix<F>,
    pub y_signs: &'a [F],
    pub l2: F,
}

impl<F: Scalar> HingeObjective<'_, F> {
    pub fn dim(&self) -> usize {
        self.x.cols() + 1
    }

    fn margin(&self, weights: &[F], row: usize) -> F {
        let d = self.x.cols();
        self.x.dot_row(row, &weights[..d]) + weights[d]
    }

    pub fn loss(&self, weights: &[F]) -> F {
        let n = F::from_count(self.x.rows());
        let mut total = F::zero();
        for r in 0..self.x.rows() {
            let slack = F::one() - self.y_signs[r] * self.margin(weights, r);
            if slack > F::zero() {
                total += slack;
            }
        }
        let d = self.x.cols();
        let mut reg = F::zero();
        for j in 0..d {
            reg += weights[j] * weights[j];
        }
        total / n + self.l2 * reg / F::real(2.0)
    }

    pub fn grad(&self, weights: &[F]) -> Vec<F> {
        let d = self.x.cols();
        let n = F::from_count(self.x.rows());
        let mut grad = vec![F::zero(); self.dim()];
        for r in 0..self.x.rows() {
            let y = self.y_signs[r];
            if F::one() - y * self.margin(weights, r) > F::zero() {
                let coef = -y / n;
                for (j, v) in self.x.row_entries(r) {
                    grad[j] += coef * v;
                }
                grad[d] += coef;
            }
        }
        for (j, g) in grad.iter_mut().enumerate().take(d) {
            *g += self.l2 * weights[j];
        }
        grad
    }

    /// Smallest distance to the hinge kink over all rows; gradient checks
    /// should only probe points where this is comfortably positive.
    pub fn min_kink_distance(&self, weights: &[F]) -> F {
        (0..self.x.rows())
            .map(|r| (F::one() - self.y_signs[r] * self.margin(weights, r)).abs())
            .fold(F::infinity(), |a, b| if b < a { b } else { a })
    }
}

pub(crate) fn fit_softmax<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<LinearState<F>> {
    let reader = ParamReader::new(spec);
    let epochs = reader.usize("epochs", 300, 0)?;
    let lr0 = reader.float("learning_rate", 0.5, 0.0)?;
    let c = reader.float("c", 1.0, 0.0)?;
    reader.finish()?;

    let l2 = F::real(1.0 / (c * x.rows() as f64));
    let objective = SoftmaxObjective {
        x,
        y,
        n_classes,
        l2,
    };
    let mut weights = vec![F::zero(); objective.dim()];
    for epoch in 0..epochs {
        let grad = objective.grad(&weights);
        let lr = F::real(lr0 / (1.0 + 0.01 * epoch as f64));
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w = *w - lr * *g;
        }
    }
    Ok(LinearState {
        kind: LinearKind::Softmax,
        weights,
        d: x.cols(),
    })
}

/// One-vs-rest epoch-ordered SGD shared by the hinge and log-loss linear
/// models.
fn fit_sgd_ovr<F: Scalar>(
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    epochs: usize,
    lr0: f64,
    c: f64,
    seed: u64,
    kind: LinearKind,
) -> LinearState<F> {
    let n = x.rows();
    let d = x.cols();
    let lambda = 1.0 / (c * n as f64);
    let lambda_f = F::real(lambda);
    let mut weights = vec![F::zero(); n_classes * (d + 1)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();

    for class in 0..n_classes {
        let w = &mut weights[class * (d + 1)..(class + 1) * (d + 1)];
        let mut t = 0usize;
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &r in &order {
                let sign = if y[r] == class { F::one() } else { -F::one() };
                let margin = x.dot_row(r, &w[..d]) + w[d];
                let lr = F::real(lr0 / (1.0 + lr0 * lambda * t as f64));
                // L2 shrink on coefficients (bias unregularized).
                let shrink = F::one() - lr * lambda_f;
                for wj in w.iter_mut().take(d) {
                    *wj = *wj * shrink;
                }
                let step = match kind {
                    LinearKind::HingeOvr => {
                        if sign * margin < F::one() {
                            lr * sign
                        } else {
                            F::zero()
                        }
                    }
                    LinearKind::LogisticOvr => {
                        let z = sign * margin;
                        let sigma = F::one() / (F::one() + (-z).exp());
                        lr * sign * (F::one() - sigma)
                    }
                    LinearKind::Softmax => unreachable!("softmax is batch-trained"),
                };
                if step != F::zero() {
                    for (j, v) in x.row_entries(r) {
                        w[j] += step * v;
                    }
                    w[d] += step;
                }
                t += 1;
            }
        }
    }
    LinearState { kind, weights, d }
}

pub(crate) fn fit_hinge_ovr<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<LinearState<F>> {
    let reader = ParamReader::new(spec);
    let epochs = reader.usize("epochs", 60, 0)?;
    let lr0 = reader.float("learning_rate", 0.5, 0.0)?;
    let c = reader.float("c", 1.0, 0.0)?;
    reader.finish()?;
    Ok(fit_sgd_ovr(
        x,
        y,
        n_classes,
        epochs,
        lr0,
        c,
        spec.seed,
        LinearKind::HingeOvr,
    ))
}

pub(crate) fn fit_logistic_ovr<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<LinearState<F>> {
    let reader = ParamReader::new(spec);
    let epochs = reader.usize("epochs", 60, 0)?;
    let lr0 = reader.float("learning_rate", 0.5, 0.0)?;
    let c = reader.float("c", 1.0, 0.0)?;
    reader.finish()?;
    Ok(fit_sgd_ovr(
        x,
        y,
        n_classes,
        epochs,
        lr0,
        c,
        spec.seed,
        LinearKind::LogisticOvr,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::{fit, Algorithm, ModelSpec};

    fn separable() -> (FeatureMatrix<f64>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let jitter = (i % 5) as f64 * 0.05;
            rows.push(vec![1.0 + jitter, 0.0 + jitter]);
            labels.push(0);
            rows.push(vec![0.0 - jitter, 1.0 - jitter]);
            labels.push(1);
        }
        (
            FeatureMatrix::from_rows(rows, vec!["a".into(), "b".into()], FeatureKind::Derived)
                .unwrap(),
            labels,
        )
    }

    #[test]
    fn zero_weight_softmax_is_uniform() {
        let (x, y) = separable();
        let spec = ModelSpec::new(Algorithm::LogisticRegression).with_int("epochs", 0);
        let model = fit(&spec, &x, &y).unwrap();
        let probs = model.predict_proba(&x).unwrap();
        for row in probs {
            assert!((row[0] - 0.5).abs() < 1e-12);
            assert!((row[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_models_separate_separable_data() {
        let (x, y) = separable();
        for algorithm in [
            Algorithm::LogisticRegression,
            Algorithm::LinearSvm,
            Algorithm::SgdLinear,
        ] {
            let model = fit(&ModelSpec::new(algorithm), &x, &y).unwrap();
            let preds = model.predict(&x).unwrap();
            let correct = preds.iter().zip(&y).filter(|(p, t)| p == t).count();
            assert_eq!(correct, y.len(), "{algorithm:?} fails on separable data");
        }
    }

    #[test]
    fn probabilities_are_simplex_rows() {
        let (x, y) = separable();
        for algorithm in [
            Algorithm::LogisticRegression,
            Algorithm::LinearSvm,
            Algorithm::SgdLinear,
        ] {
            let model = fit(&ModelSpec::new(algorithm), &x, &y).unwrap();
            for row in model.predict_proba(&x).unwrap() {
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
                assert!(row.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn sgd_is_deterministic_per_seed() {
        let (x, y) = separable();
        let spec = ModelSpec::new(Algorithm::LinearSvm).with_seed(9);
        let a = fit(&spec, &x, &y).unwrap();
        let b = fit(&spec, &x, &y).unwrap();
        assert_eq!(
            a.predict_proba(&x).unwrap(),
            b.predict_proba(&x).unwrap()
        );
    }
}
