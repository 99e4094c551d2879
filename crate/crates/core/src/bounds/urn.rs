use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bound constants for the non-isolated ball count under unequal urn
/// probabilities, and whether their hypotheses hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrnNonuniform<T = f64> {
    pub gamma: T,
    pub a: T,
    pub b: T,
    pub valid: bool,
}

pub fn urn_nonuniform_constants<T: Real>(n: u64, p: &[T]) -> Result<UrnNonuniform<T>> {
    if n == 0 || p.is_empty() {
        return Err(Error::InvalidArgument("need n >= 1 and at least one urn".into()));
    }
    if let Some(bad) = p.iter().find(|&&x| !(x > T::zero() && x < T::one())) {
        return Err(Error::InvalidArgument(format!("urn probability {bad} outside (0, 1)")));
    }
    let total = p.iter().fold(T::zero(), |a, &x| a + x);
    if (total - T::one()).abs() > T::lit(1e-9).max(T::tol_floor(T::lit(p.len() as f64))) {
        return Err(Error::InvalidArgument(format!("urn probabilities sum to {total}")));
    }
    let nf = T::lit(n as f64);
    let max_p = p.iter().fold(T::zero(), |a, &x| a.max(x));
    let sum_sq = p.iter().fold(T::zero(), |a, &x| a + x * x);
    let gamma = (nf * max_p).max(T::one());
    let a = T::lit(24495.0) * gamma * gamma * (T::lit(2.1) * gamma).exp();
    let b = T::lit(1.5) * T::lit(7776.0).sqrt() * gamma * (T::lit(1.05) * gamma).exp() / (nf * sum_sq.sqrt());
    let g2 = gamma * gamma;
    let n_min = T::lit(83.0) * g2 * (T::one() + T::lit(3.0) * gamma + T::lit(3.0) * g2) * (T::lit(1.05) * gamma).exp();
    let valid = max_p <= T::one() / T::lit(11.0) && nf >= n_min;
    Ok(UrnNonuniform { gamma, a, b, valid })
}

/// Limit of `sigma^2 / n` for uniform urns with `n / m -> alpha`:
/// `e^{-alpha} - e^{-2 alpha} (alpha^2 - alpha + 1)`.
pub fn urn_limit<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok((-alpha).exp() - (-T::lit(2.0) * alpha).exp() * (alpha * alpha - alpha + T::one()))
}
