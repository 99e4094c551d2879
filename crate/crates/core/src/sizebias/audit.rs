use serde::{Deserialize, Serialize};

use super::{CoupledPair, CoupledSampler};
use crate::distcore::RngStream;
use crate::error::{Error, Result};

/// Residuals within this many standard errors of zero are accepted.
pub const ACCEPT_SE: f64 = 4.0;

/// Test functions `f` for the identity `E[Y f(Y)] = mu E[f(Y^s)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharFn {
    One,
    Identity,
    Square,
    /// `1(y <= mu)`, a deterministic stand-in for the median indicator.
    BelowMean,
}

impl CharFn {
    pub const DEFAULTS: [CharFn; 4] = [CharFn::One, CharFn::Identity, CharFn::Square, CharFn::BelowMean];

    #[inline]
    pub fn eval(self, y: f64, mu: f64) -> f64 {
        match self {
            CharFn::One => 1.0,
            CharFn::Identity => y,
            CharFn::Square => y * y,
            CharFn::BelowMean => (y <= mu) as u8 as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CharFn::One => "one",
            CharFn::Identity => "y",
            CharFn::Square => "y2",
            CharFn::BelowMean => "le_mu",
        }
    }
}

/// The sample at which an invariant first broke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offending {
    pub sample: u64,
    pub y: f64,
    pub y_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharResidual {
    pub f: CharFn,
    /// mean of `y f(y)`
    pub lhs: f64,
    /// `mu` times the mean of `f(y_s)`
    pub rhs: f64,
    pub residual: f64,
    pub std_error: f64,
    pub within_tolerance: bool,
}

/// Summary of a batch of coupled draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingAudit {
    pub n_samples: u64,
    pub mu: f64,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub expect_monotone: bool,
    pub max_diff: f64,
    pub min_diff: f64,
    pub monotone_violations: u64,
    pub bound_violations: u64,
    pub first_monotone_violation: Option<Offending>,
    pub first_bound_violation: Option<Offending>,
    pub char_residuals: Vec<CharResidual>,
    pub passed: bool,
}

/// Running sums behind a [`CouplingAudit`]. Merging is a plain sum, so
/// accumulators built over fixed blocks combine the same way regardless of
/// how blocks were scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditAccumulator {
    fs: Vec<CharFn>,
    mu: f64,
    c: Option<f64>,
    next_index: u64,
    n: u64,
    sum_d: Vec<f64>,
    sum_d2: Vec<f64>,
    sum_lhs: Vec<f64>,
    sum_fs: Vec<f64>,
    max_diff: f64,
    min_diff: f64,
    monotone_violations: u64,
    bound_violations: u64,
    first_monotone: Option<Offending>,
    first_bound: Option<Offending>,
}

impl AuditAccumulator {
    /// `first_index` numbers the first pushed sample, for failure reports.
    pub fn new(fs: &[CharFn], mu: f64, c: Option<f64>, first_index: u64) -> Self {
        let k = fs.len();
        Self {
            fs: fs.to_vec(),
            mu,
            c,
            next_index: first_index,
            n: 0,
            sum_d: vec![0.0; k],
            sum_d2: vec![0.0; k],
            sum_lhs: vec![0.0; k],
            sum_fs: vec![0.0; k],
            max_diff: f64::NEG_INFINITY,
            min_diff: f64::INFINITY,
            monotone_violations: 0,
            bound_violations: 0,
            first_monotone: None,
            first_bound: None,
        }
    }

    pub fn push(&mut self, pair: CoupledPair) {
        let CoupledPair { y, y_s } = pair;
        let idx = self.next_index;
        self.next_index += 1;
        self.n += 1;
        for (i, f) in self.fs.iter().enumerate() {
            let lhs = y * f.eval(y, self.mu);
            let fs = f.eval(y_s, self.mu);
            let d = lhs - self.mu * fs;
            self.sum_d[i] += d;
            self.sum_d2[i] += d * d;
            self.sum_lhs[i] += lhs;
            self.sum_fs[i] += fs;
        }
        let diff = y_s - y;
        self.max_diff = self.max_diff.max(diff);
        self.min_diff = self.min_diff.min(diff);
        let offending = Offending { sample: idx, y, y_s };
        if diff < 0.0 {
            self.monotone_violations += 1;
            self.first_monotone.get_or_insert(offending);
        }
        if let Some(c) = self.c {
            if diff.abs() > c {
                self.bound_violations += 1;
                self.first_bound.get_or_insert(offending);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.fs, other.fs, "merging audits over different test functions");
        self.n += other.n;
        for i in 0..self.fs.len() {
            self.sum_d[i] += other.sum_d[i];
            self.sum_d2[i] += other.sum_d2[i];
            self.sum_lhs[i] += other.sum_lhs[i];
            self.sum_fs[i] += other.sum_fs[i];
        }
        self.max_diff = self.max_diff.max(other.max_diff);
        self.min_diff = self.min_diff.min(other.min_diff);
        self.monotone_violations += other.monotone_violations;
        self.bound_violations += other.bound_violations;
        let earliest = |a: Option<Offending>, b: Option<Offending>| match (a, b) {
            (Some(x), Some(y)) => Some(if y.sample < x.sample { y } else { x }),
            (x, y) => x.or(y),
        };
        self.first_monotone = earliest(self.first_monotone, other.first_monotone);
        self.first_bound = earliest(self.first_bound, other.first_bound);
        self.next_index = self.next_index.max(other.next_index);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn finish(&self, expect_monotone: bool) -> CouplingAudit {
        let nf = self.n as f64;
        let char_residuals: Vec<CharResidual> = (0..self.fs.len())
            .map(|i| {
                let mean = self.sum_d[i] / nf;
                let var = if self.n > 1 {
                    ((self.sum_d2[i] - self.sum_d[i] * mean) / (nf - 1.0)).max(0.0)
                } else {
                    0.0
                };
                let std_error = (var / nf).sqrt();
                let lhs = self.sum_lhs[i] / nf;
                let residual = mean.abs();
                let within_tolerance = if std_error > 0.0 {
                    residual <= ACCEPT_SE * std_error
                } else {
                    residual <= 1e-12 * (1.0 + lhs.abs())
                };
                CharResidual {
                    f: self.fs[i],
                    lhs,
                    rhs: self.mu * self.sum_fs[i] / nf,
                    residual,
                    std_error,
                    within_tolerance,
                }
            })
            .collect();
        let passed = self.n > 0
            && char_residuals.iter().all(|r| r.within_tolerance)
            && self.bound_violations == 0
            && (!expect_monotone || self.monotone_violations == 0);
        CouplingAudit {
            n_samples: self.n,
            mu: self.mu,
            c: self.c,
            expect_monotone,
            max_diff: self.max_diff,
            min_diff: self.min_diff,
            monotone_violations: self.monotone_violations,
            bound_violations: self.bound_violations,
            first_monotone_violation: self.first_monotone,
            first_bound_violation: self.first_bound,
            char_residuals,
            passed,
        }
    }
}

/// Draws `n` coupled pairs and checks the size-bias identity for each `f`
/// in `fs`, with `mu` the analytic mean of `Y`.
pub fn audit_characterization(
    sampler: &dyn CoupledSampler,
    n: u64,
    fs: &[CharFn],
    mu: f64,
    c: Option<f64>,
    expect_monotone: bool,
    rng: &mut RngStream,
) -> Result<CouplingAudit> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!(
            "audit needs at least 1000 samples, got {n}"
        )));
    }
    let mut acc = AuditAccumulator::new(fs, mu, c, 0);
    for _ in 0..n {
        acc.push(sampler.sample_coupled(rng));
    }
    Ok(acc.finish(expect_monotone))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};

    fn poisson_sampler(lambda: f64) -> impl Fn(&mut RngStream) -> CoupledPair + Send + Sync {
        let dist = Poisson::new(lambda).unwrap();
        move |rng: &mut RngStream| {
            let y: f64 = dist.sample(rng);
            CoupledPair::new(y, y + 1.0)
        }
    }

    #[test]
    fn poisson_coupling_passes() {
        let mut rng = RngStream::new(11, 0);
        let a = audit_characterization(
            &poisson_sampler(3.0),
            100_000,
            &CharFn::DEFAULTS,
            3.0,
            Some(1.0),
            true,
            &mut rng,
        )
        .unwrap();
        assert!(a.passed, "{a:?}");
        assert_eq!(a.monotone_violations, 0);
        assert_eq!((a.min_diff, a.max_diff), (1.0, 1.0));
        let one = &a.char_residuals[0];
        assert_eq!(one.f, CharFn::One);
        assert!(one.residual <= 4.0 * one.std_error);
    }

    #[test]
    fn wrong_coupling_is_caught() {
        // Y^s = Y + 2 is not size-biased Poisson
        let dist = Poisson::new(3.0).unwrap();
        let s = move |rng: &mut RngStream| {
            let y: f64 = dist.sample(rng);
            CoupledPair::new(y, y + 2.0)
        };
        let mut rng = RngStream::new(12, 0);
        let a = audit_characterization(&s, 100_000, &CharFn::DEFAULTS, 3.0, Some(1.0), true, &mut rng).unwrap();
        assert!(!a.passed);
        assert_eq!(a.bound_violations, 100_000);
        assert_eq!(a.first_bound_violation.unwrap().sample, 0);
    }

    #[test]
    fn monotone_violation_reported() {
        let s = |rng: &mut RngStream| {
            let y = rng.random_range(0..4) as f64;
            CoupledPair::new(y, if y == 3.0 { 2.0 } else { y })
        };
        let mut rng = RngStream::new(13, 0);
        let a = audit_characterization(&s, 1000, &[CharFn::One], 1.5, None, true, &mut rng).unwrap();
        assert!(a.monotone_violations > 0);
        let off = a.first_monotone_violation.unwrap();
        assert_eq!((off.y, off.y_s), (3.0, 2.0));
        assert!(!a.passed);
    }

    #[test]
    fn merge_is_blockwise_sum() {
        let s = poisson_sampler(2.0);
        let mut rng = RngStream::new(5, 0);
        let pairs: Vec<CoupledPair> = (0..5000).map(|_| s.sample_coupled(&mut rng)).collect();
        let mut whole = AuditAccumulator::new(&CharFn::DEFAULTS, 2.0, Some(1.0), 0);
        pairs.iter().for_each(|&p| whole.push(p));
        let mut a = AuditAccumulator::new(&CharFn::DEFAULTS, 2.0, Some(1.0), 0);
        let mut b = AuditAccumulator::new(&CharFn::DEFAULTS, 2.0, Some(1.0), 3000);
        pairs[..3000].iter().for_each(|&p| a.push(p));
        pairs[3000..].iter().for_each(|&p| b.push(p));
        a.merge(&b);
        let (x, y) = (whole.finish(true), a.finish(true));
        assert_eq!(x.n_samples, y.n_samples);
        for (r, q) in x.char_residuals.iter().zip(&y.char_residuals) {
            assert!((r.residual - q.residual).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_small_batches() {
        let mut rng = RngStream::new(0, 0);
        assert!(
            audit_characterization(&poisson_sampler(1.0), 10, &CharFn::DEFAULTS, 1.0, None, true, &mut rng).is_err()
        );
    }
}
