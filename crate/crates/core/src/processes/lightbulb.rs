use rand::seq::index;
use rand::Rng;

use super::{invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{BoundFamily, BoundParams, TailBound};
use crate::distcore::RngStream;
use crate::error::Result;
use crate::sizebias::{CoupledPair, CoupledSampler};

/// Closed-form mean and variance of the number of bulbs on at day `n`.
pub fn lightbulb_moments(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mut lin = 1.0;
    let mut quad = 1.0;
    for i in 1..=n {
        let i = i as f64;
        lin *= 1.0 - 2.0 * i / nf;
        quad *= 1.0 - 4.0 * i / nf + 4.0 * i * (i - 1.0) / (nf * (nf - 1.0));
    }
    let mu = nf / 2.0 * (1.0 - lin);
    let s2 = nf / 4.0 * (1.0 - quad) + nf * nf / 4.0 * (quad - lin * lin);
    (mu, s2)
}

/// Bulbs on after days `r = 1..n`, each toggling a uniform `r`-subset.
///
/// The coupling needs `n` even. For odd `n` only the law of `Y` is sampled
/// and the bound is the even-case one evaluated at `t - 2/sigma`.
#[derive(Debug, Clone)]
pub struct Lightbulb {
    n: usize,
    info: ProcessInfo,
}

/// Final bulb states and, for even `n`, the stage `n/2` toggles.
struct Outcome {
    on: Vec<bool>,
    mid: Vec<bool>,
}

impl Lightbulb {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("lightbulb needs n >= 2, got {n}")));
        }
        let (mu, sigma2) = lightbulb_moments(n);
        // exactly zero when n = 2; rounding can leave a tiny remainder
        let sigma2 = if sigma2.abs() < 1e-12 * n as f64 { 0.0 } else { sigma2 };
        let even = n.is_multiple_of(2);
        let bound = if sigma2 > 0.0 {
            let params = BoundParams::new(mu, sigma2, 2.0, true, BoundFamily::ThmMain)?;
            let shift = if even { 0.0 } else { 2.0 / sigma2.sqrt() };
            Some(TailBound::Main { params, shift })
        } else {
            None
        };
        let notes = if even {
            Vec::new()
        } else {
            vec!["odd n: approximation-only, bound shifted by 2/sigma and no coupled sampler".into()]
        };
        Ok(Self {
            n,
            info: ProcessInfo {
                process: "lightbulb".into(),
                mu,
                sigma2,
                c: Some(2.0),
                monotone: true,
                supports_left_tail: true,
                coupling_exact: even,
                bound,
                notes,
            },
        })
    }

    fn run(&self, rng: &mut RngStream) -> Outcome {
        let n = self.n;
        let mut on = vec![false; n];
        let mut mid = Vec::new();
        for r in 1..=n {
            let complement = r > n / 2;
            let k = if complement { n - r } else { r };
            let picked = index::sample(rng, n, k);
            if complement {
                on.iter_mut().for_each(|b| *b = !*b);
            }
            if n.is_multiple_of(2) && r == n / 2 {
                mid = vec![false; n];
                for i in picked.iter() {
                    mid[i] = true;
                }
            }
            for i in picked.iter() {
                on[i] = !on[i];
            }
        }
        Outcome { on, mid }
    }

    fn count(on: &[bool]) -> usize {
        on.iter().filter(|&&b| b).count()
    }
}

impl CoupledSampler for Lightbulb {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        assert!(
            self.n.is_multiple_of(2),
            "lightbulb coupling is approximation-only for odd n"
        );
        let Outcome { on, mid } = self.run(rng);
        let y = Self::count(&on);
        let i = rng.random_range(0..self.n);
        if on[i] {
            return CoupledPair::new(y as f64, y as f64);
        }
        let candidates: Vec<usize> = (0..self.n).filter(|&j| mid[j] != mid[i]).collect();
        let j = candidates[rng.random_range(0..candidates.len())];
        // swapping unequal stage-n/2 toggles flips both bulbs
        let y_s = if on[j] { y } else { y + 2 };
        CoupledPair::new(y as f64, y_s as f64)
    }
}

impl Process for Lightbulb {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Lightbulb { n: self.n }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        Self::count(&self.run(rng).on) as f64
    }

    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        (self.n.is_multiple_of(2)).then_some(self as &dyn CoupledSampler)
    }
}
