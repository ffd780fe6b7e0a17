//! Training losses: KL divergence for distribution outputs, mean absolute
//! error for coefficient vectors.

use super::tensor::Scalar;
use crate::{Error, Result};

/// Loss paired with an architecture at training time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `sum target * ln(target / pred)`; requires a distribution output.
    Kl,
    /// Mean absolute error over an unconstrained vector.
    Mae,
}

/// Tolerance on the normalization check; softmax outputs in 32-bit
/// arithmetic sum to one only to within a few hundred ulps.
const KL_NORM_TOL: f64 = 1e-3;

/// KL divergence of `target` from `pred`, in nats.
///
/// Target entries are floored at 1e-12 inside the logarithm; zero targets
/// contribute nothing. The result is clamped at zero: flooring can push a
/// mathematically zero divergence a few ulps negative.
pub fn kl_loss<T: Scalar>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} entries", target.len()),
            actual: format!("{}", pred.len()),
        });
    }
    for (name, dist) in [("prediction", pred), ("target", target)] {
        let sum: f64 = dist.iter().map(|v| v.as_f64()).sum();
        if (sum - 1.0).abs() > KL_NORM_TOL {
            let _ = name;
            return Err(Error::NotNormalized { sum });
        }
    }
    let floor = T::from_f64(1e-12);
    let mut acc = T::zero();
    for (&p, &t) in pred.iter().zip(target) {
        if t > T::zero() {
            let t_floored = if t < floor { floor } else { t };
            acc = acc + t * (t_floored / p).ln();
        }
    }
    Ok(acc.max(T::zero()))
}

/// Gradient of [`kl_loss`] with respect to the prediction, scaled by
/// `scale` and written into `out`.
pub fn kl_loss_grad<T: Scalar>(pred: &[T], target: &[T], scale: T, out: &mut [T]) {
    for ((slot, &p), &t) in out.iter_mut().zip(pred).zip(target) {
        *slot = if t > T::zero() { -scale * t / p } else { T::zero() };
    }
}

/// Mean absolute error.
pub fn mae_loss<T: Scalar>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} entries", target.len()),
            actual: format!("{}", pred.len()),
        });
    }
    let mut acc = T::zero();
    for (&p, &t) in pred.iter().zip(target) {
        acc = acc + (p - t).abs();
    }
    Ok(acc / T::from_f64(pred.len() as f64))
}

/// Gradient of [`mae_loss`] with respect to the prediction, scaled by
/// `scale` and written into `out`. Entries are `scale * sign(p - t) / N`.
pub fn mae_loss_grad<T: Scalar>(pred: &[T], target: &[T], scale: T, out: &mut [T]) {
    let inv = scale / T::from_f64(pred.len() as f64);
    for ((slot, &p), &t) in out.iter_mut().zip(pred).zip(target) {
        *slot = if p > t {
            inv
        } else if p < t {
            -inv
        } else {
            T::zero()
        };
    }
}
