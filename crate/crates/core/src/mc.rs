//! Parallel Monte Carlo: tail estimates with Clopper–Pearson bounds,
//! domination verdicts against analytic curves, and coupling audits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;

use crate::bounds::BoundCurve;
use crate::distcore::{canonical_atom, FinitePmf, RngStream, Side, TAIL_SLACK};
use crate::error::{Error, Result};
use crate::processes::{ProcessConfig, Runs};
use crate::sizebias::{AuditAccumulator, CharFn, CoupledSampler, CouplingAudit};

/// Replications per random stream; block `b` always uses stream `b`.
pub const BLOCK: u64 = 1 << 16;
pub const DEFAULT_CL: f64 = 0.999;
pub const MIN_REPLICATIONS: u64 = 10_000;
/// Exact tails may exceed a bound by this much before failing.
pub const EXACT_SLACK: f64 = 1e-12;
/// Coupled runs samples per second a single worker must reach at `n = 100`.
pub const RUNS_THROUGHPUT_FLOOR: f64 = 1e6;

/// Evenly spaced grid `start:stop:step`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TailGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let ok =
            start.is_finite() && stop.is_finite() && step.is_finite() && start >= 0.0 && stop >= start && step > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "grid needs 0 <= start <= stop and step > 0, got {start}:{stop}:{step}"
            )));
        }
        let g = Self { start, stop, step };
        if g.len() > 1_000_000 {
            return Err(Error::InvalidArgument(format!("grid {g} has too many points")));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| canonical_atom(self.start + i as f64 * self.step))
            .collect()
    }
}

impl FromStr for TailGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid must look like start:stop:step, got {s:?}")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("grid value {p:?}: {e}")))
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

impl fmt::Display for TailGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "t grid must be finite, nonnegative and sorted".into(),
        ));
    }
    Ok(())
}

/// Runs `f(block, first, count, rng)` over consecutive blocks of [`BLOCK`]
/// replications on a pool of `workers` threads (0 picks the default) and
/// returns the results in block order.
pub fn run_blocks<A, F>(total: u64, seed: u64, workers: usize, f: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(u64, u64, u64, &mut RngStream) -> A + Sync,
{
    let blocks = total.div_ceil(BLOCK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let first = b * BLOCK;
                let count = BLOCK.min(total - first);
                let mut rng = RngStream::new(seed, b);
                f(b, first, count, &mut rng)
            })
            .collect()
    }))
}

/// How the deviation `Y - mu` is scaled before comparison with `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    /// `(Y - mu) / sigma` from sampled draws.
    Standardized,
    /// `Y - mu` unscaled, used when `sigma = 0`.
    Raw,
    /// Exact probabilities from an enumerated law.
    Exact,
}

/// Tail probabilities on one side, per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideTail {
    pub side: Side,
    /// Hit counts; empty for exact tails.
    pub counts: Vec<u64>,
    pub estimate: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub process: String,
    pub mode: TailMode,
    pub t_grid: Vec<f64>,
    #[serde(rename = "N")]
    pub n: u64,
    pub cl: f64,
    pub seed: u64,
    pub block_size: u64,
    pub mu: f64,
    pub sigma: f64,
    pub sides: Vec<SideTail>,
}

impl EmpiricalTail {
    pub fn side(&self, side: Side) -> &SideTail {
        self.sides
            .iter()
            .find(|s| s.side == side)
            .expect("both sides are present")
    }
}

/// One-sided Clopper–Pearson bounds `(lower, upper)`, each at level `cl`.
pub fn clopper_pearson(k: u64, n: u64, cl: f64) -> (f64, f64) {
    let (kf, nf) = (k as f64, n as f64);
    let alpha = 1.0 - cl;
    let lower = if k == 0 {
        0.0
    } else {
        inv_beta_reg(kf, nf - kf + 1.0, alpha)
    };
    let upper = if k >= n {
        1.0
    } else {
        inv_beta_reg(kf + 1.0, nf - kf, cl)
    };
    (lower.clamp(0.0, 1.0), upper.clamp(0.0, 1.0))
}

/// `hist[i]` counts draws hitting exactly the first `i` grid points.
fn hit_histogram(grid: &[f64], hist: &mut [u64], z: f64) {
    hist[grid.partition_point(|&t| t <= z + TAIL_SLACK)] += 1;
}

fn counts_from_histogram(hist: &[u64]) -> Vec<u64> {
    let mut counts = vec![0u64; hist.len() - 1];
    let mut acc = 0;
    for i in (0..counts.len()).rev() {
        acc += hist[i + 1];
        counts[i] = acc;
    }
    counts
}

/// Estimates both standardized tails of `Y` from `n` independent draws.
pub fn run_tail_experiment(
    cfg: &ProcessConfig,
    t_grid: &[f64],
    n: u64,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalTail> {
    run_tail_experiment_cl(cfg, t_grid, n, seed, workers, DEFAULT_CL)
}

pub fn run_tail_experiment_cl(
    cfg: &ProcessConfig,
    t_grid: &[f64],
    n: u64,
    seed: u64,
    workers: usize,
    cl: f64,
) -> Result<EmpiricalTail> {
    check_grid(t_grid)?;
    if n < MIN_REPLICATIONS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_REPLICATIONS} replications, got {n}"
        )));
    }
    if !(cl > 0.0 && cl < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {cl}"
        )));
    }
    let process = cfg.build()?;
    let info = process.info();
    let (mu, sigma) = (info.mu, info.sigma());
    let (mode, scale) = if sigma > 0.0 {
        (TailMode::Standardized, sigma)
    } else {
        (TailMode::Raw, 1.0)
    };
    let k = t_grid.len();
    let hists = run_blocks(n, seed, workers, |_, _, count, rng| {
        let mut right = vec![0u64; k + 1];
        let mut left = vec![0u64; k + 1];
        for _ in 0..count {
            let z = (process.sample_y(rng) - mu) / scale;
            hit_histogram(t_grid, &mut right, z);
            hit_histogram(t_grid, &mut left, -z);
        }
        (left, right)
    })?;
    let mut left = vec![0u64; k + 1];
    let mut right = vec![0u64; k + 1];
    for (l, r) in hists {
        left.iter_mut().zip(l).for_each(|(a, b)| *a += b);
        right.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    }
    let side_tail = |side: Side, hist: &[u64]| {
        let counts = counts_from_histogram(hist);
        let (ci_low, ci_high) = counts.iter().map(|&c| clopper_pearson(c, n, cl)).unzip();
        SideTail {
            side,
            estimate: counts.iter().map(|&c| c as f64 / n as f64).collect(),
            counts,
            ci_low,
            ci_high,
        }
    };
    Ok(EmpiricalTail {
        process: cfg.name().to_string(),
        mode,
        t_grid: t_grid.to_vec(),
        n,
        cl,
        seed,
        block_size: BLOCK,
        mu,
        sigma,
        sides: vec![side_tail(Side::Left, &left), side_tail(Side::Right, &right)],
    })
}

/// Exact tails of a finite law, in the same shape as a simulated experiment.
pub fn exact_tails(process: &str, law: &FinitePmf, mu: f64, sigma: f64, t_grid: &[f64]) -> Result<EmpiricalTail> {
    check_grid(t_grid)?;
    let sides = Side::BOTH
        .iter()
        .map(|&side| {
            let estimate = t_grid
                .iter()
                .map(|&t| law.exact_tail(mu, sigma, t, side))
                .collect::<Result<Vec<f64>>>()?;
            Ok(SideTail {
                side,
                counts: Vec::new(),
                ci_low: estimate.clone(),
                ci_high: estimate.clone(),
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalTail {
        process: process.to_string(),
        mode: TailMode::Exact,
        t_grid: t_grid.to_vec(),
        n: 0,
        cl: 1.0,
        seed: 0,
        block_size: 0,
        mu,
        sigma,
        sides,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// No bound is licensed on this side.
    Na,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Na => "n/a",
        }
    }
}

/// One line of the result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub process: String,
    pub side: Side,
    pub t: f64,
    /// Replications; absent for exact tails.
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: Option<f64>,
    pub verdict: Outcome,
}

pub const CSV_HEADER: &str = "process,side,t,N,estimate,ci_low,ci_high,bound,verdict";

impl TailRow {
    pub fn csv_line(&self) -> String {
        let n = self.n.map(|v| v.to_string()).unwrap_or_default();
        let bound = self.bound.map(|v| format!("{v:.12e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{},{}",
            self.process,
            self.side,
            self.t,
            n,
            self.estimate,
            self.ci_low,
            self.ci_high,
            bound,
            self.verdict.as_str()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub process: String,
    pub rows: Vec<TailRow>,
    pub failures: usize,
    pub passed: bool,
}

impl Verdict {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.csv_line())?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

/// Compares tails with a bound curve on the same grid. A simulated point fails
/// when its lower confidence bound exceeds the curve; an exact point fails
/// when it exceeds the curve by more than [`EXACT_SLACK`].
pub fn verify_domination(tail: &EmpiricalTail, curve: &BoundCurve) -> Result<Verdict> {
    let grid = curve.grid();
    if grid.len() != tail.t_grid.len() || grid.iter().zip(&tail.t_grid).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::GridMismatch(format!(
            "tail grid has {} points, bound grid {}",
            tail.t_grid.len(),
            grid.len()
        )));
    }
    if tail.mode == TailMode::Raw {
        return Err(Error::InvalidArgument(
            "raw tails (sigma = 0) cannot be compared with a bound".into(),
        ));
    }
    let mut rows = Vec::with_capacity(2 * grid.len());
    for s in &tail.sides {
        for (i, p) in curve.points.iter().enumerate() {
            let bound = match s.side {
                Side::Left => p.left,
                Side::Right => Some(p.right),
            };
            let verdict = match (bound, tail.mode) {
                (None, _) => Outcome::Na,
                (Some(b), TailMode::Exact) if s.estimate[i] > b + EXACT_SLACK => Outcome::Fail,
                (Some(b), TailMode::Standardized) if s.ci_low[i] > b => Outcome::Fail,
                _ => Outcome::Pass,
            };
            rows.push(TailRow {
                process: tail.process.clone(),
                side: s.side,
                t: tail.t_grid[i],
                n: (tail.mode != TailMode::Exact).then_some(tail.n),
                estimate: s.estimate[i],
                ci_low: s.ci_low[i],
                ci_high: s.ci_high[i],
                bound,
                verdict,
            });
        }
    }
    let failures = rows.iter().filter(|r| r.verdict == Outcome::Fail).count();
    Ok(Verdict {
        process: tail.process.clone(),
        rows,
        failures,
        passed: failures == 0,
    })
}

/// Draws `n` coupled pairs in fixed blocks and audits them.
pub fn run_audit(cfg: &ProcessConfig, n: u64, seed: u64, workers: usize, fs: &[CharFn]) -> Result<CouplingAudit> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!(
            "audit needs at least 1000 samples, got {n}"
        )));
    }
    let process = cfg.build()?;
    let sampler = process
        .coupling()
        .ok_or_else(|| Error::Unsupported(format!("{} has no exact coupling sampler", cfg.name())))?;
    let info = process.info();
    let parts = run_blocks(n, seed, workers, |_, first, count, rng| {
        let mut acc = AuditAccumulator::new(fs, info.mu, info.c, first);
        for _ in 0..count {
            acc.push(sampler.sample_coupled(rng));
        }
        acc
    })?;
    let mut total = AuditAccumulator::new(fs, info.mu, info.c, 0);
    for p in &parts {
        total.merge(p);
    }
    Ok(total.finish(info.monotone))
}

/// Coupled runs samples per second on the calling thread (`n = 100`, `m = 2`).
pub fn runs_throughput(samples: u64, seed: u64) -> Result<f64> {
    let r = Runs::new(100, 2, 0.5)?;
    let mut rng = RngStream::new(seed, 0);
    let start = Instant::now();
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += r.sample_coupled(&mut rng).y_s;
    }
    let secs = start.elapsed().as_secs_f64();
    std::hint::black_box(acc);
    Ok(samples as f64 / secs.max(1e-9))
}
