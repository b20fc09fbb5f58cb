//! One-hidden-layer multilayer perceptron.
//!
//! ReLU hidden layer, softmax output, cross-entropy loss, seeded
//! Xavier-uniform init, mini-batch gradient descent on a fixed schedule.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::learners::{softmax_in_place, ModelSpec, ParamReader};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MlpState<F> {
    pub d: usize,
    pub hidden: usize,
    pub n_classes: usize,
    /// Flattened parameters: w1 (d*h), b1 (h), w2 (h*k), b2 (k).
    pub params: Vec<F>,
}

/// Parameter layout offsets.
fn offsets(d: usize, h: usize, k: usize) -> (usize, usize, usize, usize) {
    let w1 = 0;
    let b1 = w1 + d * h;
    let w2 = b1 + h;
    let b2 = w2 + h * k;
    (w1, b1, w2, b2)
}

/// Full-batch MLP objective, public for gradient verification.
pub struct MlpObjective<'a, F: Scalar> {
    pub x: &'a FeatureMatrix<F>,
    pub y: &'a [usize],
    pub n_classes: usize,
    pub hidden: usize,
    pub l2: F,
}

impl<F: Scalar> MlpObjective<'_, F> {
    pub fn dim(&self) -> usize {
        let d = self.x.cols();
        d * self.hidden + self.hidden + self.hidden * self.n_classes + self.n_classes
    }

    /// Seeded Xavier-uniform parameter init.
    pub fn init_params(&self, seed: u64) -> Vec<F> {
        init_params(self.x.cols(), self.hidden, self.n_classes, seed)
    }

    pub fn loss(&self, params: &[F]) -> F {
        let rows: Vec<usize> = (0..self.x.rows()).collect();
        let (loss, _) = forward_backward(
            self.x,
            self.y,
            self.n_classes,
            self.hidden,
            params,
            &rows,
            self.l2,
            false,
        );
        loss
    }

    pub fn grad(&self, params: &[F]) -> Vec<F> {
        let rows: Vec<usize> = (0..self.x.rows()).collect();
        let (_, grad) = forward_backward(
            self.x,
            self.y,
            self.n_classes,
            self.hidden,
            params,
            &rows,
            self.l2,
            true,
        );
        grad.expect("gradient requested")
    }
}

fn init_params<F: Scalar>(d: usize, h: usize, k: usize, seed: u64) -> Vec<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w1o, b1o, w2o, b2o) = offsets(d, h, k);
    let mut params = vec![F::zero(); b2o + k];
    let limit1 = (6.0 / (d + h) as f64).sqrt();
    for slot in params.iter_mut().take(b1o).skip(w1o) {
        *slot = F::real(rng.gen_range(-limit1..limit1));
    }
    let limit2 = (6.0 / (h + k) as f64).sqrt();
    for slot in params.iter_mut().take(b2o).skip(w2o) {
        *slot = F::real(rng.gen_range(-limit2..limit2));
    }
    params
}

/// Shared forward/backward pass over a row subset. Returns the mean
/// cross-entropy (plus L2) and, when asked, the gradient.
#[allow(clippy::too_many_arguments)]
fn forward_backward<F: Scalar>(
    x: &FeatureMatrix<F>,
    y: &[usize],
    k: usize,
    h: usize,
    params: &[F],
    rows: &[usize],
    l2: F,
    want_grad: bool,
) -> (F, Option<Vec<F>>) {
    let d = x.cols();
    let (w1o, b1o, w2o, b2o) = offsets(d, h, k);
    let n = F::from_count(rows.len());
    let mut grad = want_grad.then(|| vec![F::zero(); params.len()]);
    let mut loss = F::zero();

    let mut input = vec![F::zero(); d];
    let mut hidden = vec![F::zero(); h];
    let mut output = vec![F::zero(); k];

    for &r in rows {
        x.write_row_dense(r, &mut input);
        // Hidden pre-activation and ReLU.
        for j in 0..h {
            let mut z = params[b1o + j];
            for (i, &v) in input.iter().enumerate() {
                if v != F::zero() {
                    z += v * params[w1o + i * h + j];
                }
            }
            hidden[j] = if z > F::zero() { z } else { F::zero() };
        }
        for c in 0..k {
            let mut z = params[b2o + c];
            for j in 0..h {
                if hidden[j] != F::zero() {
                    z += hidden[j] * params[w2o + j * k + c];
                }
            }
            output[c] = z;
        }
        softmax_in_place(&mut output);
        loss -= output[y[r]].max(F::real(1e-300)).ln();

        if let Some(grad) = grad.as_mut() {
            // delta2 = p - onehot.
            let mut delta_hidden = vec![F::zero(); h];
            for c in 0..k {
                let mut delta = output[c];
                if c == y[r] {
                    delta -= F::one();
                }
                delta = delta / n;
                grad[b2o + c] += delta;
                for j in 0..h {
                    if hidden[j] != F::zero() {
                        grad[w2o + j * k + c] += delta * hidden[j];
                        delta_hidden[j] += delta * params[w2o + j * k + c];
                    }
                }
            }
            for j in 0..h {
                if hidden[j] > F::zero() && delta_hidden[j] != F::zero() {
                    grad[b1o + j] += delta_hidden[j];
                    for (i, &v) in input.iter().enumerate() {
                        if v != F::zero() {
                            grad[w1o + i * h + j] += delta_hidden[j] * v;
                        }
                    }
                }
            }
        }
    }

    loss = loss / n;
    if l2 > F::zero() {
        let mut reg = F::zero();
        for slot in params.iter().take(b1o) {
            reg += *slot * *slot;
        }
        for slot in params.iter().take(b2o).skip(w2o) {
            reg += *slot * *slot;
        }
        loss += l2 * reg / F::real(2.0);
        if let Some(grad) = grad.as_mut() {
            for i in 0..b1o {
                grad[i] += l2 * params[i];
            }
            for i in w2o..b2o {
                grad[i] += l2 * params[i];
            }
        }
    }
    (loss, grad)
}

pub(crate) fn fit_mlp<F: Scalar>(
    spec: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
) -> Result<MlpState<F>> {
    let reader = ParamReader::new(spec);
    let hidden = reader.usize("hidden", 100, 1)?;
    let epochs = reader.usize("epochs", 200, 0)?;
    let batch_size = reader.usize("batch_size", 32, 1)?;
    let lr0 = reader.float("learning_rate", 0.05, 0.0)?;
    let l2 = reader.float_min_inclusive("l2", 0.0, 0.0)?;
    reader.finish()?;

    let l2 = F::real(l2);
    let mut params = init_params::<F>(x.cols(), hidden, n_classes, spec.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..x.rows()).collect();

    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let lr = F::real(lr0 / (1.0 + 0.01 * epoch as f64));
        for batch in order.chunks(batch_size) {
            let (_, grad) = forward_backward(
                x,
                y,
                n_classes,
                hidden,
                &params,
                batch,
                l2,
                true,
            );
            let grad = grad.expect("gradient requested");
            for (p, g) in params.iter_mut().zip(&grad) {
                *p = *p - lr * *g;
            }
        }
    }

    Ok(MlpState {
        d: x.cols(),
        hidden,
        n_classes,
        params,
    })
}

impl<F: Scalar> MlpState<F> {
    pub fn predict_proba(&self, x: &FeatureMatrix<F>) -> Vec<Vec<F>> {
        let (w1o, b1o, w2o, b2o) = offsets(self.d, self.hidden, self.n_classes);
        let mut input = vec![F::zero(); self.d];
        (0..x.rows())
            .map(|r| {
                x.write_row_dense(r, &mut input);
                let mut hidden = vec![F::zero(); self.hidden];
                for (j, slot) in hidden.iter_mut().enumerate() {
                    let mut z = self.params[b1o + j];
                    for (i, &v) in input.iter().enumerate() {
                        if v != F::zero() {
                            z += v * self.params[w1o + i * self.hidden + j];
                        }
                    }
                    *slot = if z > F::zero() { z } else { F::zero() };
                }
                let mut output = vec![F::zero(); self.n_classes];
                for (c, slot) in output.iter_mut().enumerate() {
                    let mut z = self.params[b2o + c];
                    for (j, &a) in hidden.iter().enumerate() {
                        if a != F::zero() {
                            z += a * self.params[w2o + j * self.n_classes + c];
                        }
                    }
                    *slot = z;
                }
                softmax_in_place(&mut output);
                output
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::{fit, Algorithm};

    fn three_blobs() -> (FeatureMatrix<f64>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let j = (i % 10) as f64 * 0.05;
            rows.push(vec![2.0 + j, 0.0 + j]);
            labels.push(0);
            rows.push(vec![0.0 - j, 2.0 - j]);
            labels.push(1);
            rows.push(vec![-2.0 + j, -2.0 + j]);
            labels.push(2);
        }
        (
            FeatureMatrix::from_rows(rows, vec!["a".into(), "b".into()], FeatureKind::Derived)
                .unwrap(),
            labels,
        )
    }

    #[test]
    fn mlp_separates_three_blobs() {
        let (x, y) = three_blobs();
        let spec = ModelSpec::new(Algorithm::Mlp)
            .with_int("hidden", 16)
            .with_int("epochs", 120);
        let model = fit(&spec, &x, &y).unwrap();
        let preds = model.predict(&x).unwrap();
        let correct = preds.iter().zip(&y).filter(|(p, t)| p == t).count();
        assert!(correct as f64 >= 0.97 * y.len() as f64);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (x, y) = three_blobs();
        let spec = ModelSpec::new(Algorithm::Mlp)
            .with_int("hidden", 8)
            .with_int("epochs", 10);
        let model = fit(&spec, &x, &y).unwrap();
        for row in model.predict_proba(&x).unwrap() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_is_deterministic_per_seed() {
        let (x, y) = three_blobs();
        let spec = ModelSpec::new(Algorithm::Mlp)
            .with_int("hidden", 8)
            .with_int("epochs", 5)
            .with_seed(3);
        let a = fit(&spec, &x, &y).unwrap().predict_proba(&x).unwrap();
        let b = fit(&spec, &x, &y).unwrap().predict_proba(&x).unwrap();
        assert_eq!(a, b);
    }
}
