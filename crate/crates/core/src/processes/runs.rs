use rand::{Rng, RngCore};

use super::{bernoulli_threshold, check_prob, invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{BoundFamily, BoundParams, TailBound};
use crate::distcore::RngStream;
use crate::error::Result;
use crate::sizebias::{local_dependence_bias, CoupledPair, CoupledSampler, DependencySets};

/// Number of `alpha` with `xi[alpha..alpha+m]` (cyclic) all ones.
pub fn runs_statistic(xi: &[bool], m: usize) -> usize {
    let n = xi.len();
    (0..n).filter(|&a| (0..m).all(|j| xi[(a + j) % n])).count()
}

/// `mu = n p^m` and `sigma^2 = n p^m (1 + 2 (p - p^m)/(1 - p) - (2m - 1) p^m)`.
pub fn runs_moments(n: usize, m: usize, p: f64) -> Result<(f64, f64)> {
    if m == 0 || n < 2 * m {
        return Err(invalid(format!(
            "the variance formula needs n >= 2m >= 2, got n = {n}, m = {m}"
        )));
    }
    check_prob("p", p)?;
    let pm = p.powi(m as i32);
    let nf = n as f64;
    let s2 = nf * pm * (1.0 + 2.0 * (p - pm) / (1.0 - p) - (2 * m - 1) as f64 * pm);
    Ok((nf * pm, s2))
}

/// Cyclic `m`-runs of ones in `n` Bernoulli(`p`) trials.
#[derive(Debug, Clone)]
pub struct Runs {
    n: usize,
    m: usize,
    p: f64,
    threshold: u64,
    deps: Option<DependencySets>,
    info: ProcessInfo,
}

impl Runs {
    pub fn new(n: usize, m: usize, p: f64) -> Result<Self> {
        let (mu, sigma2) = runs_moments(n, m, p)?;
        let c = (2 * m - 1) as f64;
        let params = BoundParams::new(mu, sigma2, c, true, BoundFamily::ThmMain)?;
        Ok(Self {
            n,
            m,
            p,
            threshold: bernoulli_threshold(p),
            // the bit-mask path covers n <= 128
            deps: (n > 128).then(|| DependencySets::cyclic_windows(n, m)),
            info: ProcessInfo {
                process: "runs".into(),
                mu,
                sigma2,
                c: Some(c),
                monotone: true,
                supports_left_tail: true,
                coupling_exact: true,
                bound: Some(TailBound::main(params)),
                notes: Vec::new(),
            },
        })
    }

    /// Draws the trials as 64-bit words, low bit first.
    fn draw_words(&self, rng: &mut RngStream) -> Vec<u64> {
        let words = self.n.div_ceil(64);
        let mut out = vec![0u64; words];
        if self.p == 0.5 {
            for w in out.iter_mut() {
                *w = rng.next_u64();
            }
        } else {
            for i in 0..self.n {
                if rng.next_u64() < self.threshold {
                    out[i / 64] |= 1 << (i % 64);
                }
            }
        }
        let tail = self.n % 64;
        if tail != 0 {
            out[words - 1] &= (1u64 << tail) - 1;
        }
        out
    }

    fn full_mask(&self) -> u128 {
        if self.n == 128 {
            u128::MAX
        } else {
            (1u128 << self.n) - 1
        }
    }

    #[inline]
    fn rotr(&self, x: u128, j: usize) -> u128 {
        if j == 0 {
            x
        } else {
            ((x >> j) | (x << (self.n - j))) & self.full_mask()
        }
    }

    #[inline]
    fn count_mask(&self, x: u128) -> u32 {
        let mut w = x;
        for j in 1..self.m {
            w &= self.rotr(x, j);
        }
        w.count_ones()
    }

    fn window_mask(&self, alpha: usize) -> u128 {
        let ones = if self.m == 128 {
            u128::MAX
        } else {
            (1u128 << self.m) - 1
        };
        // rotate left by alpha within n bits
        self.rotr(ones, (self.n - alpha) % self.n)
    }

    fn to_mask(words: &[u64]) -> u128 {
        words[0] as u128 | words.get(1).map_or(0, |&w| (w as u128) << 64)
    }

    fn to_bits(&self, words: &[u64]) -> Vec<bool> {
        (0..self.n).map(|i| words[i / 64] >> (i % 64) & 1 == 1).collect()
    }

    /// Coupled draw through the generic local-dependence construction.
    /// Consumes the generator exactly like the bit-mask path.
    pub fn sample_coupled_generic(&self, rng: &mut RngStream) -> CoupledPair {
        let bits = self.to_bits(&self.draw_words(rng));
        let alpha = rng.random_range(0..self.n);
        let owned;
        let deps = match &self.deps {
            Some(d) => d,
            None => {
                owned = DependencySets::cyclic_windows(self.n, self.m);
                &owned
            }
        };
        let n = self.n;
        let m = self.m;
        let x = |c: &[bool], b: usize| (0..m).all(|j| c[(b + j) % n]) as u8 as f64;
        let kernel = |_a: usize, _r: &mut RngStream| vec![true; m];
        let r = local_dependence_bias(&bits, alpha, &kernel, deps, x, |_| true, None, rng)
            .expect("the all-ones kernel matches the window size");
        CoupledPair::new(r.y, r.y_s)
    }
}

impl CoupledSampler for Runs {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        if self.n > 128 {
            return self.sample_coupled_generic(rng);
        }
        let x = Self::to_mask(&self.draw_words(rng));
        let alpha = rng.random_range(0..self.n);
        let y = self.count_mask(x);
        let y_s = self.count_mask(x | self.window_mask(alpha));
        CoupledPair::new(y as f64, y_s as f64)
    }
}

impl Process for Runs {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Runs {
            n: self.n,
            m: self.m,
            p: self.p,
        }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        let words = self.draw_words(rng);
        if self.n <= 128 {
            self.count_mask(Self::to_mask(&words)) as f64
        } else {
            runs_statistic(&self.to_bits(&words), self.m) as f64
        }
    }

    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        Some(self)
    }
}
