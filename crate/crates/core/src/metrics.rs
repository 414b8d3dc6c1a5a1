//! Forecast accuracy.
//!
//! The headline measure is the mean absolute relative error
//! `(1/n) Σ |(P_i - T_i) / T_i|` (a MAPE expressed as a fraction, not a
//! percentage), reported as `accuracy = 100 × (1 - mape)`. A plain MAE in °C
//! is reported next to it.

use std::fmt;

/// Smallest |actual| in °C accepted as a relative-error denominator.
pub const DENOMINATOR_GUARD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("length mismatch: {predicted} predicted vs {actual} actual values")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("no values to score")]
    Empty,
    #[error("actual value {value} at index {index} is within {DENOMINATOR_GUARD} °C of zero")]
    NearZeroActual { index: usize, value: f64 },
}

fn check_lengths(predicted: &[f64], actual: &[f64]) -> Result<(), MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch { predicted: predicted.len(), actual: actual.len() });
    }
    if predicted.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Mean absolute relative error, as a fraction.
pub fn mape(predicted: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(predicted, actual)?;
    if let Some(index) = actual.iter().position(|t| t.is_nan() || t.abs() < DENOMINATOR_GUARD) {
        return Err(MetricsError::NearZeroActual { index, value: actual[index] });
    }
    let sum: f64 = predicted.iter().zip(actual).map(|(p, t)| ((p - t) / t).abs()).sum();
    Ok(sum / predicted.len() as f64)
}

pub fn accuracy_from_mape(mape: f64) -> f64 {
    100.0 * (1.0 - mape)
}

/// `100 × (1 - mape)`.
pub fn accuracy_percent(predicted: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    mape(predicted, actual).map(accuracy_from_mape)
}

/// Mean absolute error in °C.
pub fn mae_celsius(predicted: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(predicted, actual)?;
    let sum: f64 = predicted.iter().zip(actual).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / predicted.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mape: f64,
    pub accuracy_percent: f64,
    pub mae_c: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn compute(predicted: &[f64], actual: &[f64]) -> Result<Self, MetricsError> {
        let mape = mape(predicted, actual)?;
        Ok(Self {
            mape,
            accuracy_percent: accuracy_from_mape(mape),
            mae_c: mae_celsius(predicted, actual)?,
            n: predicted.len(),
        })
    }
}

impl fmt::Display for MetricSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "mape = {:.6}", self.mape)?;
        writeln!(f, "accuracy_percent = {:.3}", self.accuracy_percent)?;
        write!(f, "mae_c = {:.4}", self.mae_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_perfect() {
        let p = [25.0, 28.5, 31.2];
        assert_eq!(mape(&p, &p).unwrap(), 0.0);
        assert_eq!(accuracy_percent(&p, &p).unwrap(), 100.0);
        assert_eq!(mae_celsius(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_cases() {
        assert!((mape(&[26.0], &[25.0]).unwrap() - 0.04).abs() < 1e-15);
        assert!((accuracy_percent(&[26.0], &[25.0]).unwrap() - 96.0).abs() < 1e-12);
        // (|1/25| + |-1/25|) / 2
        assert!((mape(&[26.0, 24.0], &[25.0, 25.0]).unwrap() - 0.04).abs() < 1e-15);
        assert!((accuracy_from_mape(0.038) - 96.2).abs() < 1e-12);
        assert_eq!(mae_celsius(&[26.0, 24.0], &[25.0, 25.0]).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(mape(&[1.0], &[1.0, 2.0]), Err(MetricsError::LengthMismatch { predicted: 1, actual: 2 }));
        assert_eq!(mape(&[], &[]), Err(MetricsError::Empty));
        assert_eq!(
            mape(&[1.0, 2.0, 3.0], &[1.0, 0.3, -0.2]),
            Err(MetricsError::NearZeroActual { index: 1, value: 0.3 })
        );
        assert!(mape(&[1.0], &[-0.5]).is_ok());
        assert!(matches!(mape(&[1.0], &[f64::NAN]), Err(MetricsError::NearZeroActual { .. })));
    }

    #[test]
    fn summary_fields_agree() {
        let s = MetricSummary::compute(&[26.0, 24.0], &[25.0, 25.0]).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.accuracy_percent, accuracy_from_mape(s.mape));
        assert!(s.to_string().contains("accuracy_percent = 96.000"));
    }

    fn temps() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..50).prop_flat_map(|n| {
            (proptest::collection::vec(-30.0f64..45.0, n), proptest::collection::vec(1.0f64..45.0, n))
        })
    }

    proptest! {
        #[test]
        fn zero_iff_equal((p, t) in temps()) {
            prop_assert_eq!(mape(&t, &t).unwrap(), 0.0);
            let m = mape(&p, &t).unwrap();
            prop_assert_eq!(m == 0.0, p == t);
        }

        #[test]
        fn scale_invariant((p, t) in temps(), c in prop::sample::select(vec![2.0, 10.0, 0.75])) {
            let cp: Vec<f64> = p.iter().map(|v| c * v).collect();
            let ct: Vec<f64> = t.iter().map(|v| c * v).collect();
            prop_assert!((mape(&cp, &ct).unwrap() - mape(&p, &t).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn accuracy_complements_mape((p, t) in temps()) {
            let m = mape(&p, &t).unwrap();
            let a = accuracy_percent(&p, &t).unwrap();
            prop_assert!((a + 100.0 * m - 100.0).abs() < 1e-9);
        }

        #[test]
        fn mae_triangle(n in 1usize..40, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || (0..n).map(|_| rng.random_range(-20.0..40.0)).collect::<Vec<f64>>();
            let (p, q, t) = (draw(), draw(), draw());
            let lhs = mae_celsius(&p, &t).unwrap();
            let rhs = mae_celsius(&p, &q).unwrap() + mae_celsius(&q, &t).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
