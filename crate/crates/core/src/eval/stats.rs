//! The 5x2cv F-test and the F-distribution upper tail.
//!
//! Five seeded stratified 50/50 splits; on each replication both
//! orientations are evaluated, giving error-rate differences `p_i^1`,
//! `p_i^2`. With per-replication variance
//! `s_i^2 = (p_i^1 - mean_i)^2 + (p_i^2 - mean_i)^2`, the statistic
//!
//! ```text
//! f = sum_{i,j} (p_i^j)^2 / (2 * sum_i s_i^2)
//! ```
//!
//! follows F(10, 5) under the null of equal performance; the p-value is the
//! exact upper tail via the regularized incomplete beta function.

use serde::{Deserialize, Serialize};

use crate::corpus::{stratified_indices, Dataset};
use crate::error::Result;
use crate::features::{FeatureMatrix, PipelineSpec};
use crate::learners::{derive_seed, fit_with_classes, ModelSpec};
use crate::scalar::Scalar;

/// Hypothesis decision at the chosen significance level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// The null hypothesis of equal performance is rejected.
    Reject,
    /// The null hypothesis stands.
    Accept,
}

/// Full 5x2cv F-test outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiveByTwoResult<F> {
    /// Error-rate differences `p[i][j]` for replication i, orientation j.
    pub p: [[F; 2]; 5],
    /// Per-replication variances `s_i^2`.
    pub s2: [F; 5],
    pub f: F,
    pub p_value: F,
    pub alpha: F,
    pub decision: Decision,
    /// Set when every variance was zero and the statistic degenerated.
    pub degenerate: bool,
}

/// Natural log of the gamma function (Lanczos approximation).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_7e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut series = 1.000_000_000_190_015;
    for c in COEFFS {
        y += 1.0;
        series += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * series / x).ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn betainc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * betacf(a, b, x) / a
    } else {
        1.0 - front * betacf(b, a, 1.0 - x) / b
    }
}

/// Upper tail (survival function) of the F distribution with `d1` and `d2`
/// degrees of freedom, exact to better than 1e-6 absolute error.
pub fn f_upper_tail<F: Scalar>(f: F, d1: usize, d2: usize) -> F {
    let f = f.as_f64();
    if f <= 0.0 {
        return F::one();
    }
    let d1 = d1 as f64;
    let d2 = d2 as f64;
    let x = d2 / (d2 + d1 * f);
    F::real(betainc(d2 / 2.0, d1 / 2.0, x).clamp(0.0, 1.0))
}

/// Evaluates the statistic on a prebuilt difference table.
pub fn five_by_two_from_table<F: Scalar>(p: [[F; 2]; 5], alpha: F) -> FiveByTwoResult<F> {
    let two = F::real(2.0);
    let mut s2 = [F::zero(); 5];
    let mut sum_sq = F::zero();
    let mut sum_s2 = F::zero();
    let mut all_zero = true;
    for i in 0..5 {
        let mean = (p[i][0] + p[i][1]) / two;
        let d0 = p[i][0] - mean;
        let d1 = p[i][1] - mean;
        s2[i] = d0 * d0 + d1 * d1;
        sum_s2 += s2[i];
        sum_sq += p[i][0] * p[i][0] + p[i][1] * p[i][1];
        if p[i][0] != F::zero() || p[i][1] != F::zero() {
            all_zero = false;
        }
    }

    let (f, p_value, degenerate) = if sum_s2 > F::zero() {
        let f = sum_sq / (two * sum_s2);
        (f, f_upper_tail(f, 10, 5), false)
    } else if all_zero {
        // No differences anywhere: the models are indistinguishable.
        (F::zero(), F::one(), true)
    } else {
        // Constant nonzero differences: zero variance but a real gap.
        (F::infinity(), F::zero(), true)
    };
    let decision = if p_value < alpha {
        Decision::Reject
    } else {
        Decision::Accept
    };
    FiveByTwoResult {
        p,
        s2,
        f,
        p_value,
        alpha,
        decision,
        degenerate,
    }
}

fn error_rate<F: Scalar>(
    spec: &ModelSpec,
    x_train: &FeatureMatrix<F>,
    y_train: &[usize],
    x_test: &FeatureMatrix<F>,
    y_test: &[usize],
    n_classes: usize,
) -> Result<F> {
    let model = fit_with_classes(spec, x_train, y_train, n_classes)?;
    let preds = model.predict(x_test)?;
    let wrong = preds.iter().zip(y_test).filter(|(p, t)| p != t).count();
    Ok(F::from_count(wrong) / F::from_count(y_test.len().max(1)))
}

/// 5x2cv F-test between two model specs on a feature matrix.
pub fn five_by_two_ftest<F: Scalar>(
    spec_a: &ModelSpec,
    spec_b: &ModelSpec,
    x: &FeatureMatrix<F>,
    y: &[usize],
    n_classes: usize,
    alpha: F,
    seed: u64,
) -> Result<FiveByTwoResult<F>> {
    let mut p = [[F::zero(); 2]; 5];
    for (i, row) in p.iter_mut().enumerate() {
        let plan = stratified_indices(y, 2, derive_seed(seed, i as u64))?;
        let half: Vec<Vec<usize>> = plan.folds.clone();
        for (j, slot) in row.iter_mut().enumerate() {
            let (train, test) = if j == 0 {
                (&half[0], &half[1])
            } else {
                (&half[1], &half[0])
            };
            let x_train = x.subset_rows(train);
            let y_train: Vec<usize> = train.iter().map(|&r| y[r]).collect();
            let x_test = x.subset_rows(test);
            let y_test: Vec<usize> = test.iter().map(|&r| y[r]).collect();
            let err_a = error_rate(spec_a, &x_train, &y_train, &x_test, &y_test, n_classes)?;
            let err_b = error_rate(spec_b, &x_train, &y_train, &x_test, &y_test, n_classes)?;
            *slot = err_a - err_b;
        }
    }
    Ok(five_by_two_from_table(p, alpha))
}

/// 5x2cv F-test from records: the feature pipeline is refit on each
/// training half.
pub fn five_by_two_ftest_pipeline<F: Scalar>(
    spec_a: &ModelSpec,
    spec_b: &ModelSpec,
    dataset: &Dataset,
    pipeline: &PipelineSpec,
    alpha: F,
    seed: u64,
) -> Result<FiveByTwoResult<F>> {
    let n_classes = dataset.n_classes();
    let mut p = [[F::zero(); 2]; 5];
    for (i, row) in p.iter_mut().enumerate() {
        let plan = stratified_indices(&dataset.labels, 2, derive_seed(seed, i as u64))?;
        let half = plan.folds.clone();
        for (j, slot) in row.iter_mut().enumerate() {
            let (train, test) = if j == 0 {
                (&half[0], &half[1])
            } else {
                (&half[1], &half[0])
            };
            let train_records: Vec<&_> = train.iter().map(|&r| &dataset.records[r]).collect();
            let test_records: Vec<&_> = test.iter().map(|&r| &dataset.records[r]).collect();
            let y_train: Vec<usize> = train.iter().map(|&r| dataset.labels[r]).collect();
            let y_test: Vec<usize> = test.iter().map(|&r| dataset.labels[r]).collect();
            let fitted = pipeline.fit(&train_records)?;
            let x_train = fitted.transform(&train_records)?;
            let x_test = fitted.transform(&test_records)?;
            let err_a = error_rate(spec_a, &x_train, &y_train, &x_test, &y_test, n_classes)?;
            let err_b = error_rate(spec_b, &x_train, &y_train, &x_test, &y_test, n_classes)?;
            *slot = err_a - err_b;
        }
    }
    Ok(five_by_two_from_table(p, alpha))
}

impl<F: Scalar> FiveByTwoResult<F> {
    pub fn rejected(&self) -> bool {
        self.decision == Decision::Reject
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use crate::learners::Algorithm;

    #[test]
    fn hand_table_gives_f_of_one() {
        // p_i^1 = 0.1, p_i^2 = 0.0 for all i:
        // numerator = 5 * 0.01 = 0.05; each s_i^2 = 0.005; denominator =
        // 2 * 0.025 = 0.05; f = 1.
        let p = [[0.1, 0.0]; 5];
        let result = five_by_two_from_table::<f64>(p, 0.05);
        assert!((result.f - 1.0).abs() < 1e-9);
        assert!(!result.degenerate);
        for s in result.s2 {
            assert!((s - 0.005).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_differences_accept() {
        let result = five_by_two_from_table::<f64>([[0.0; 2]; 5], 0.05);
        assert_eq!(result.p_value, 1.0);
        assert_eq!(result.decision, Decision::Accept);
        assert!(result.degenerate);
    }

    #[test]
    fn constant_nonzero_differences_reject_with_flag() {
        let result = five_by_two_from_table::<f64>([[0.2, 0.2]; 5], 0.05);
        assert_eq!(result.p_value, 0.0);
        assert_eq!(result.decision, Decision::Reject);
        assert!(result.degenerate);
    }

    #[test]
    fn f_tail_reference_values() {
        // Frozen from standard F-distribution tables / reference software.
        assert!((f_upper_tail::<f64>(4.735, 10, 5) - 0.05000133329987642).abs() < 1e-6);
        assert!((f_upper_tail::<f64>(1.0, 10, 5) - 0.5348805734622).abs() < 1e-6);
        assert!((f_upper_tail::<f64>(3.0, 10, 5) - 0.11848355278206937).abs() < 1e-6);
        assert!((f_upper_tail::<f64>(0.5, 2, 3) - 0.649519052838329).abs() < 1e-6);
        assert!((f_upper_tail::<f64>(2.5, 1, 1) - 0.3590170359713762).abs() < 1e-6);
        assert_eq!(f_upper_tail::<f64>(0.0, 10, 5), 1.0);
    }

    #[test]
    fn f_tail_is_monotone_decreasing() {
        let mut previous = 1.0;
        for step in 1..40 {
            let tail = f_upper_tail::<f64>(step as f64 * 0.25, 10, 5);
            assert!(tail < previous);
            previous = tail;
        }
    }

    #[test]
    fn identical_specs_accept_the_null() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            rows.push(vec![if i % 2 == 0 { 1.0 } else { -1.0 } + i as f64 * 0.001]);
            y.push(i % 2);
        }
        let x = FeatureMatrix::from_rows(rows, vec!["f".into()], FeatureKind::Derived).unwrap();
        let spec = ModelSpec::new(Algorithm::GaussianNb);
        let result = five_by_two_ftest::<f64>(&spec, &spec, &x, &y, 2, 0.05, 11).unwrap();
        assert_eq!(result.p_value, 1.0);
        assert_eq!(result.decision, Decision::Accept);
    }

    #[test]
    fn swapping_models_is_bit_exact_symmetric() {
        // Negating every difference leaves squares, variances, and the
        // statistic bit-identical.
        let p = [
            [0.03, -0.01],
            [0.05, 0.02],
            [-0.04, 0.00],
            [0.01, 0.01],
            [-0.02, 0.03],
        ];
        let swapped = p.map(|row| row.map(|v| -v));
        let a = five_by_two_from_table::<f64>(p, 0.05);
        let b = five_by_two_from_table::<f64>(swapped, 0.05);
        assert_eq!(a.f.to_bits(), b.f.to_bits());
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
        assert_eq!(a.decision, b.decision);
    }
}
