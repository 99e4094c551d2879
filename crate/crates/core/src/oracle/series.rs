use statrs::function::gamma::ln_gamma;

use crate::distcore::FinitePmf;
use crate::error::{Error, Result};

/// Largest truncation error accepted by the series oracles.
pub const MAX_EPS: f64 = 1e-10;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= MAX_EPS {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "eps must lie in (0, {MAX_EPS}], got {eps}"
        )))
    }
}

/// Poisson weights `p_k` for `k` in `lo..=hi`, walking out from the mode by
/// successive ratios until the geometric bound on each discarded tail drops
/// below `eps / 2`. Returns `(lo, weights)`.
pub(crate) fn poisson_window(lambda: f64, eps: f64, keep_left: bool) -> Result<(u64, Vec<f64>)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    check_eps(eps)?;
    let half = eps / 2.0;
    let mode = lambda.floor() as u64;
    let p_mode = (mode as f64 * lambda.ln() - lambda - ln_gamma(mode as f64 + 1.0)).exp();

    let mut right = vec![p_mode];
    let mut k = mode;
    loop {
        let p = *right.last().expect("nonempty");
        // p_{k+j} <= p_k r^j with r = lambda / (k + 1) < 1
        let r = lambda / (k + 1) as f64;
        if r < 1.0 && p * r / (1.0 - r) < half {
            break;
        }
        right.push(p * r);
        k += 1;
    }
    let hi = k;

    let mut left = Vec::new();
    let mut k = mode;
    let mut p = p_mode;
    while k > 0 {
        // p_{k-j} <= p_k r^j with r = k / lambda < 1
        let r = k as f64 / lambda;
        if !keep_left && r < 1.0 && p * r / (1.0 - r) < half {
            break;
        }
        p *= r;
        k -= 1;
        left.push(p);
    }
    let lo = k;
    left.reverse();
    left.extend(right);
    debug_assert_eq!(left.len() as u64, hi - lo + 1);
    Ok((lo, left))
}

/// Poisson(`lambda`) truncated to the central window holding all but at most
/// `eps` of the mass, then renormalized.
pub fn poisson_truncated_pmf(lambda: f64, eps: f64) -> Result<FinitePmf> {
    let (lo, w) = poisson_window(lambda, eps, false)?;
    FinitePmf::from_weights(w.into_iter().enumerate().map(|(i, p)| ((lo + i as u64) as f64, p)))
}

/// Law of `Z_1 + ... + Z_N` with `N ~ Poisson(lambda)`, by convolution powers
/// of `z` weighted with Poisson masses; `N` is cut where its tail drops below
/// `eps`, and the result renormalized.
pub fn compound_truncated_pmf(lambda: f64, z: &FinitePmf, eps: f64) -> Result<FinitePmf> {
    let (lo, w) = poisson_window(lambda, eps, true)?;
    debug_assert_eq!(lo, 0);
    let mut weights: Vec<(f64, f64)> = Vec::new();
    let mut power = FinitePmf::point_mass(0.0);
    for (k, &pk) in w.iter().enumerate() {
        if k > 0 {
            power = power.convolve(z);
        }
        weights.extend(power.iter().map(|(x, p)| (x, p * pk)));
    }
    FinitePmf::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poisson_mean_and_variance() {
        for lambda in [0.3, 3.0, 4.0, 40.0, 1000.0] {
            let p = poisson_truncated_pmf(lambda, 1e-12).unwrap();
            let m = p.moments();
            assert!((m.mean - lambda).abs() < 1e-10 * lambda.max(1.0), "{lambda}");
            assert_relative_eq!(m.variance, lambda, max_relative = 1e-9);
        }
    }

    #[test]
    fn discarded_mass_is_small() {
        let (lo, w) = poisson_window(3.0, 1e-12, false).unwrap();
        assert_eq!(lo, 0);
        assert!(1.0 - w.iter().sum::<f64>() < 1e-12);
        let (lo, w) = poisson_window(500.0, 1e-12, false).unwrap();
        assert!(lo > 0);
        assert!((1.0 - w.iter().sum::<f64>()).abs() < 1e-12);
        assert!(poisson_window(3.0, 1e-6, false).is_err());
    }

    #[test]
    fn unit_claims_give_poisson() {
        let z = FinitePmf::point_mass(1.0);
        let c = compound_truncated_pmf(2.5, &z, 1e-12).unwrap();
        let p = poisson_truncated_pmf(2.5, 1e-12).unwrap();
        assert!(c.tv_distance(&p) < 1e-12);
    }

    #[test]
    fn wald_identities() {
        let z = FinitePmf::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let c = compound_truncated_pmf(2.0, &z, 1e-12).unwrap();
        let m = c.moments();
        assert!((m.mean - 3.0).abs() < 1e-10);
        // Var = lambda E Z^2
        assert!((m.variance - 2.0 * 2.5).abs() < 1e-9);
    }
}
