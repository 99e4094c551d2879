use rand::Rng;

use super::{invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{BoundFamily, BoundParams, TailBound};
use crate::distcore::RngStream;
use crate::error::Result;
use crate::scalar::{one_minus_pow, powi0};
use crate::sizebias::{CoupledPair, CoupledSampler};

const PI_SLACK: f64 = 1e-9;

/// `mu = n (1 - (1 - 1/m)^(n-1))` and
/// `sigma^2 = n (1-1/m)^(n-1) + (m-1) n (n-1)/m (1-2/m)^(n-2) - n^2 (1-1/m)^(2n-2)`, with `0^0 = 1`.
pub fn urn_moments(n: usize, m: usize) -> (f64, f64) {
    let nf = n as f64;
    let q = 1.0 / m as f64;
    let ni = n as i64;
    let iso = one_minus_pow(q, ni - 1);
    let mu = nf * (1.0 - iso);
    let s2 = nf * iso + (m as f64 - 1.0) * nf * (nf - 1.0) / m as f64 * powi0(1.0 - 2.0 * q, ni - 2)
        - nf * nf * one_minus_pow(q, 2 * ni - 2);
    (mu, s2)
}

/// Relocation probabilities `pi_k`, `k = 0..n-1`, for `N ~ Bin(n - 1, 1/m)`.
///
/// Uses `P(N > k | N > 0) - P(N > k) = P(N > k) P(N = 0) / P(N > 0)` and the
/// ratio `R_k = P(N > k) / P(N = k)`, which obeys
/// `R_k = (P(N = k+1) / P(N = k)) (1 + R_{k+1})` with `R_{n-1} = 0`.
pub fn urn_pi(n: usize, m: usize) -> Result<Vec<f64>> {
    if n < 2 || m < 2 {
        return Err(invalid(format!(
            "urn needs n >= 2 balls and m >= 2 urns, got n = {n}, m = {m}"
        )));
    }
    let q = 1.0 / m as f64;
    let trials = n - 1;
    let p0 = one_minus_pow(q, trials as i64);
    let odds0 = p0 / (1.0 - p0);
    let mut r = vec![0.0; n];
    for k in (0..trials).rev() {
        let step = (trials - k) as f64 / (k + 1) as f64 * q / (1.0 - q);
        r[k] = step * (1.0 + r[k + 1]);
    }
    let mut pi = vec![0.0; n];
    for k in 0..trials {
        let v = r[k] * odds0 / (1.0 - k as f64 / trials as f64);
        assert!(
            (-PI_SLACK..=1.0 + PI_SLACK).contains(&v),
            "pi_{k} = {v} outside [0, 1] for n = {n}, m = {m}"
        );
        pi[k] = v.clamp(0.0, 1.0);
    }
    Ok(pi)
}

#[inline]
fn contribution(count: u32) -> i64 {
    if count >= 2 {
        count as i64
    } else {
        0
    }
}

/// Non-isolated balls among `n` balls thrown uniformly into `m` urns.
#[derive(Debug, Clone)]
pub struct UrnUniform {
    n: usize,
    m: usize,
    pi: Vec<f64>,
    info: ProcessInfo,
}

impl UrnUniform {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let pi = urn_pi(n, m)?;
        let (mu, sigma2) = urn_moments(n, m);
        let bound = if sigma2 > 0.0 {
            Some(TailBound::main(BoundParams::new(
                mu,
                sigma2,
                2.0,
                false,
                BoundFamily::ThmMain,
            )?))
        } else {
            None
        };
        Ok(Self {
            n,
            m,
            pi,
            info: ProcessInfo {
                process: "urn".into(),
                mu,
                sigma2,
                c: Some(2.0),
                monotone: false,
                supports_left_tail: false,
                coupling_exact: true,
                bound,
                notes: Vec::new(),
            },
        })
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    fn draw(&self, rng: &mut RngStream) -> Vec<u32> {
        (0..self.n).map(|_| rng.random_range(0..self.m as u32)).collect()
    }

    fn counts(&self, x: &[u32]) -> Vec<u32> {
        let mut c = vec![0u32; self.m];
        for &u in x {
            c[u as usize] += 1;
        }
        c
    }

    pub fn statistic(&self, x: &[u32]) -> usize {
        let c = self.counts(x);
        x.iter().filter(|&&u| c[u as usize] >= 2).count()
    }

    /// The coupling with its random choices made explicit: ball `i`,
    /// relocation flag `b` and moved ball `j != i`.
    pub fn coupled_from(&self, x: &[u32], i: usize, b: bool, j: usize) -> CoupledPair {
        let counts = self.counts(x);
        let y: i64 = counts.iter().map(|&c| contribution(c)).sum();
        let (from, to) = (x[j] as usize, x[i] as usize);
        let y_s = if b && from != to {
            y - contribution(counts[from]) - contribution(counts[to])
                + contribution(counts[from] - 1)
                + contribution(counts[to] + 1)
        } else {
            y
        };
        CoupledPair::new(y as f64, y_s as f64)
    }
}

impl CoupledSampler for UrnUniform {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        let x = self.draw(rng);
        let i = rng.random_range(0..self.n);
        let occupancy = x.iter().filter(|&&u| u == x[i]).count() - 1;
        let b = rng.random_bool(self.pi[occupancy]);
        let mut j = rng.random_range(0..self.n - 1);
        if j >= i {
            j += 1;
        }
        self.coupled_from(&x, i, b, j)
    }
}

impl Process for UrnUniform {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Urn { n: self.n, m: self.m }
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
