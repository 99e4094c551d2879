use rand::seq::SliceRandom;
use rand::Rng;

use super::{invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{BoundFamily, BoundParams, TailBound};
use crate::distcore::RngStream;
use crate::error::{Error, Result};
use crate::numeric::factorial;
use crate::sizebias::{CoupledPair, CoupledSampler};

/// Converts a 1-based permutation to 0-based values, checking it.
fn to_zero_based(p: &[usize], what: &str) -> Result<Vec<usize>> {
    let k = p.len();
    let mut seen = vec![false; k];
    let mut out = Vec::with_capacity(k);
    for &v in p {
        if v == 0 || v > k || seen[v - 1] {
            return Err(invalid(format!("{what} is not a permutation of 1..{k}: {p:?}")));
        }
        seen[v - 1] = true;
        out.push(v - 1);
    }
    Ok(out)
}

fn inverse(tau: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; tau.len()];
    for (j, &t) in tau.iter().enumerate() {
        inv[t] = j;
    }
    inv
}

/// Whether the cyclic window starting at `alpha` is in the relative order
/// `tau`, i.e. `pi[alpha + tau_inv[v]]` increases in `v`.
#[inline]
pub fn window_in_order<T: PartialOrd>(pi: &[T], tau_inv: &[usize], alpha: usize) -> bool {
    let n = pi.len();
    tau_inv
        .windows(2)
        .all(|w| pi[(alpha + w[0]) % n] < pi[(alpha + w[1]) % n])
}

fn count_windows<T: PartialOrd>(pi: &[T], tau_inv: &[usize]) -> usize {
    (0..pi.len()).filter(|&a| window_in_order(pi, tau_inv, a)).count()
}

/// Number of cyclic windows of `pi` (a permutation of `1..n`) that appear in
/// the relative order `tau` (a permutation of `1..m`).
pub fn perm_statistic(pi: &[usize], tau: &[usize]) -> Result<usize> {
    let pi0 = to_zero_based(pi, "pi")?;
    let tau0 = to_zero_based(tau, "tau")?;
    if tau0.len() > pi0.len() {
        return Err(invalid(format!(
            "pattern length {} exceeds n = {}",
            tau0.len(),
            pi0.len()
        )));
    }
    Ok(count_windows(&pi0, &inverse(&tau0)))
}

/// `I_k` for `k = 1..m-1`: whether `tau(1..m-k)` and `tau(k+1..m)` have the
/// same relative order.
pub fn perm_indicator_overlaps(tau: &[usize]) -> Vec<bool> {
    let m = tau.len();
    let order = |s: &[usize]| {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by_key(|&i| s[i]);
        idx
    };
    (1..m).map(|k| order(&tau[..m - k]) == order(&tau[k..])).collect()
}

/// `mu = n / m!` and the variance
/// `n (1/m! (1 - (2m-1)/m!) + 2 sum_k I_k / (m+k)!)`, valid for `n >= 2m`.
pub fn perm_moments(n: usize, tau: &[usize]) -> Result<(f64, f64)> {
    let m = tau.len();
    if n < 2 * m {
        return Err(invalid(format!(
            "the variance formula needs n >= 2m, got n = {n}, m = {m}"
        )));
    }
    let fact = |k: usize| {
        factorial(k as u64)
            .map(|f| f as f64)
            .ok_or_else(|| Error::Overflow(format!("{k}!")))
    };
    let mf = fact(m)?;
    let nf = n as f64;
    let mut cov = 0.0;
    for (i, &ik) in perm_indicator_overlaps(tau).iter().enumerate() {
        if ik {
            cov += 1.0 / fact(m + i + 1)?;
        }
    }
    let sigma2 = nf * (1.0 / mf * (1.0 - (2 * m - 1) as f64 / mf) + 2.0 * cov);
    Ok((nf / mf, sigma2))
}

/// Pattern occurrences in a uniform random permutation.
#[derive(Debug, Clone)]
pub struct PermPattern {
    n: usize,
    tau: Vec<usize>,
    tau_inv: Vec<usize>,
    info: ProcessInfo,
}

impl PermPattern {
    pub fn new(n: usize, tau: &[usize]) -> Result<Self> {
        let m = tau.len();
        if m < 3 || n < m {
            return Err(invalid(format!("perm needs n >= m >= 3, got n = {n}, m = {m}")));
        }
        let tau0 = to_zero_based(tau, "tau")?;
        let (mu, sigma2) = perm_moments(n, &tau0)?;
        let c = (2 * m - 1) as f64;
        let params = BoundParams::new(mu, sigma2, c, false, BoundFamily::ThmMain)?;
        let mut notes = Vec::new();
        if tau0.iter().enumerate().any(|(i, &t)| i != t) {
            notes.push(
                "variance formula for non-identity patterns is reported as printed; compare with the oracle".into(),
            );
        }
        Ok(Self {
            n,
            tau_inv: inverse(&tau0),
            tau: tau0,
            info: ProcessInfo {
                process: "perm".into(),
                mu,
                sigma2,
                c: Some(c),
                monotone: false,
                supports_left_tail: false,
                coupling_exact: true,
                bound: Some(TailBound::main(params)),
                notes,
            },
        })
    }

    pub fn m(&self) -> usize {
        self.tau.len()
    }

    /// Statistic of a 0-based permutation or any sequence of distinct values.
    pub fn statistic<T: PartialOrd>(&self, pi: &[T]) -> usize {
        count_windows(pi, &self.tau_inv)
    }

    /// Rearranges the window at `alpha` into the order `tau`.
    pub fn rebias<T: PartialOrd + Copy>(&self, pi: &mut [T], alpha: usize) {
        let n = pi.len();
        let m = self.m();
        let mut vals: Vec<T> = (0..m).map(|j| pi[(alpha + j) % n]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
        for (v, &s) in vals.iter().enumerate() {
            pi[(alpha + self.tau_inv[v]) % n] = s;
        }
    }

    /// `(Y(pi), Y(pi^alpha))`, recounting only windows that meet the rebiased one.
    pub fn coupled_from<T: PartialOrd + Copy>(&self, pi: &[T], alpha: usize) -> CoupledPair {
        let n = pi.len();
        let m = self.m();
        let y = self.statistic(pi);
        let mut pa = pi.to_vec();
        self.rebias(&mut pa, alpha);
        let mut y_s = y as i64;
        let span = (2 * m - 1).min(n);
        for k in 0..span {
            let b = (alpha + n * m - (m - 1) + k) % n;
            y_s += window_in_order(&pa, &self.tau_inv, b) as i64 - window_in_order(pi, &self.tau_inv, b) as i64;
        }
        CoupledPair::new(y as f64, y_s as f64)
    }

    fn draw(&self, rng: &mut RngStream) -> Vec<u32> {
        let mut pi: Vec<u32> = (0..self.n as u32).collect();
        pi.shuffle(rng);
        pi
    }
}

impl CoupledSampler for PermPattern {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        let pi = self.draw(rng);
        let alpha = rng.random_range(0..self.n);
        self.coupled_from(&pi, alpha)
    }
}

impl Process for PermPattern {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Perm {
            n: self.n,
            tau: self.tau.iter().map(|t| t + 1).collect(),
        }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        self.statistic(&self.draw(rng)) as f64
    }

    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn statistic_examples() {
        assert_eq!(perm_statistic(&[1, 2, 3, 4, 5, 6], &[1, 2, 3]).unwrap(), 4);
        assert_eq!(perm_statistic(&[6, 5, 4, 3, 2, 1], &[1, 2, 3]).unwrap(), 0);
        assert_eq!(perm_statistic(&[2, 1, 3, 4, 5, 6], &[1, 2, 3]).unwrap(), 3);
        assert!(perm_statistic(&[1, 1, 3], &[1, 2, 3]).is_err());
        assert!(perm_statistic(&[1, 2], &[1, 2, 3]).is_err());
    }

    #[test]
    fn moments_identity_pattern() {
        let (mu, s2) = perm_moments(6, &[0, 1, 2]).unwrap();
        assert_relative_eq!(mu, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s2, 23.0 / 30.0, epsilon = 1e-15);
        let p = PermPattern::new(6, &[1, 2, 3]).unwrap();
        assert_eq!(p.info().c, Some(5.0));
        assert!(!p.info().supports_left_tail);
        assert!(PermPattern::new(5, &[1, 2, 3]).is_err());
    }

    #[test]
    fn variance_floor() {
        for tau in [[1, 2, 3], [1, 3, 2], [2, 1, 3], [3, 1, 2]] {
            let t0: Vec<usize> = tau.iter().map(|t| t - 1).collect();
            let (mu, s2) = perm_moments(10, &t0).unwrap();
            assert!(s2 >= mu * (1.0 - 5.0 / 6.0) - 1e-15);
        }
    }

    #[test]
    fn overlap_indicators() {
        assert_eq!(perm_indicator_overlaps(&[0, 1, 2]), vec![true, true]);
        assert_eq!(perm_indicator_overlaps(&[0, 2, 1]), vec![false, true]);
    }

    #[test]
    fn coupling_examples() {
        let p = PermPattern::new(6, &[1, 2, 3]).unwrap();
        let pi = [1u32, 0, 2, 3, 4, 5];
        let pair = p.coupled_from(&pi, 0);
        assert_eq!((pair.y, pair.y_s), (3.0, 4.0));
        let mut pa = pi;
        p.rebias(&mut pa, 0);
        assert_eq!(pa, [0, 1, 2, 3, 4, 5]);
        let id = [0u32, 1, 2, 3, 4, 5];
        let same = p.coupled_from(&id, 2);
        assert_eq!(same.y, same.y_s);
    }

    #[test]
    fn local_recount_matches_full_recount() {
        let p = PermPattern::new(9, &[2, 3, 1]).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..2000 {
            let pi = p.draw(&mut rng);
            let alpha = rng.random_range(0..9);
            let pair = p.coupled_from(&pi, alpha);
            let mut pa = pi.clone();
            p.rebias(&mut pa, alpha);
            assert_eq!(pair.y_s, p.statistic(&pa) as f64);
            assert!(window_in_order(&pa, &p.tau_inv, alpha));
        }
    }

    #[test]
    fn coupling_is_bounded() {
        let p = PermPattern::new(10, &[1, 2, 3]).unwrap();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..100_000 {
            assert!(p.sample_coupled(&mut rng).diff().abs() <= 5.0);
        }
    }
}
