//! Exact laws of `Y` and of the coupled pair `(Y, Y^s)` on small instances.

mod series;

pub use series::{compound_truncated_pmf, poisson_truncated_pmf, MAX_EPS};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distcore::{canonical_atom, FinitePmf, MASS_TOL};
use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, KahanSum};
use crate::processes::{runs_statistic, urn_pi, ClaimSpec, Extrema, GraphIso, PermPattern, ProcessConfig, UrnUniform};

/// Elementary outcomes an enumeration may visit.
pub const MAX_OUTCOMES: u128 = 100_000_000;

/// Truncation used for the Poisson-type laws.
pub const SERIES_EPS: f64 = 1e-12;

pub const RUNS_MAX_N: usize = 24;
pub const PERM_MAX_N: usize = 8;
pub const EXTREMA_MAX_N: usize = 9;
pub const EXTREMA_COUPLING_MAX_N: usize = 7;
pub const URN_MAX_THROWS: u128 = 10_000_000;
pub const LIGHTBULB_MAX_N: usize = 6;
pub const GRAPH_MAX_N: usize = 6;

/// Exact joint law of `(Y, Y^s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLaw {
    /// `(y, y_s, probability)`, sorted by `(y, y_s)`.
    pub pairs: Vec<(f64, f64, f64)>,
}

impl JointLaw {
    pub fn new(pairs: Vec<(f64, f64, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(u64, u64), (f64, f64, KahanSum)> = BTreeMap::new();
        for (y, ys, p) in pairs {
            if !(p >= 0.0) || !y.is_finite() || !ys.is_finite() {
                return Err(Error::InvalidPmf(format!("bad joint entry ({y}, {ys}, {p})")));
            }
            if p == 0.0 {
                continue;
            }
            let (y, ys) = (canonical_atom(y), canonical_atom(ys));
            let e = merged
                .entry((order_key(y), order_key(ys)))
                .or_insert((y, ys, KahanSum::new()));
            e.2.add(p);
        }
        let pairs: Vec<(f64, f64, f64)> = merged.into_values().map(|(y, ys, s)| (y, ys, s.value())).collect();
        let total: f64 = pairs.iter().map(|e| e.2).collect::<KahanSum>().value();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!("joint mass {total} differs from 1")));
        }
        Ok(Self { pairs })
    }

    pub fn marginal_y(&self) -> Result<FinitePmf> {
        FinitePmf::new(
            self.pairs.iter().map(|e| e.0).collect(),
            self.pairs.iter().map(|e| e.2).collect(),
        )
    }

    pub fn marginal_ys(&self) -> Result<FinitePmf> {
        FinitePmf::new(
            self.pairs.iter().map(|e| e.1).collect(),
            self.pairs.iter().map(|e| e.2).collect(),
        )
    }

    /// Largest `|y_s - y|` with positive probability.
    pub fn max_abs_diff(&self) -> f64 {
        self.pairs.iter().map(|e| (e.1 - e.0).abs()).fold(0.0, f64::max)
    }

    /// Probability of `y_s < y`.
    pub fn prob_decrease(&self) -> f64 {
        self.pairs.iter().filter(|e| e.1 < e.0).map(|e| e.2).sum()
    }
}

/// Sort key preserving the order of finite floats.
fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | 1 << 63
    }
}

/// Integer counts keyed by `(y, y_s, class)`. Every unit in one class carries
/// the same probability, so merging partial tallies is exact.
#[derive(Debug, Clone, Default)]
struct Tally(BTreeMap<(i64, i64, u32), u128>);

impl Tally {
    #[inline]
    fn add(&mut self, y: i64, ys: i64, class: u32, count: u128) {
        *self.0.entry((y, ys, class)).or_insert(0) += count;
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (k, c) in other.0 {
            *self.0.entry(k).or_insert(0) += c;
        }
        self
    }

    fn total(&self) -> u128 {
        self.0.values().sum()
    }

    /// Probabilities with `weight(class, count)`.
    fn weighted(&self, weight: impl Fn(u32, u128) -> f64) -> Vec<(f64, f64, f64)> {
        self.0
            .iter()
            .map(|(&(y, ys, cl), &c)| (y as f64, ys as f64, weight(cl, c)))
            .collect()
    }

    /// Probabilities when every unit is equally likely.
    fn uniform(&self) -> Vec<(f64, f64, f64)> {
        let total = self.total() as f64;
        self.weighted(|_, c| c as f64 / total)
    }
}

fn law_from(entries: Vec<(f64, f64, f64)>) -> Result<FinitePmf> {
    let pmf = FinitePmf::new(
        entries.iter().map(|e| e.0).collect(),
        entries.iter().map(|e| e.2).collect(),
    )?;
    Ok(pmf)
}

fn guard(what: &str, outcomes: Option<u128>) -> Result<()> {
    match outcomes {
        Some(o) if o <= MAX_OUTCOMES => Ok(()),
        Some(o) => Err(Error::Infeasible(format!(
            "{what}: {o} outcomes exceed the limit of {MAX_OUTCOMES}"
        ))),
        None => Err(Error::Infeasible(format!("{what}: outcome count overflows"))),
    }
}

fn size_guard(what: &str, n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::Infeasible(format!(
            "{what}: n = {n} exceeds the enumeration limit {max}"
        )))
    } else {
        Ok(())
    }
}

/// Calls `f` on every permutation of `0..n` whose first entry is `first`.
fn for_each_perm_with_first(n: usize, first: usize, mut f: impl FnMut(&[u32])) {
    let mut rest: Vec<u32> = (0..n as u32).filter(|&v| v as usize != first).collect();
    let mut perm = vec![first as u32; n];
    // Heap's algorithm on the tail
    let k = rest.len();
    let mut c = vec![0usize; k];
    perm[1..].copy_from_slice(&rest);
    f(&perm);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                rest.swap(0, i);
            } else {
                rest.swap(c[i], i);
            }
            perm[1..].copy_from_slice(&rest);
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Tallies over all permutations of `0..n`, split by first entry across threads.
fn tally_perms(n: usize, f: impl Fn(&[u32], &mut Tally) + Sync) -> Tally {
    (0..n)
        .into_par_iter()
        .map(|first| {
            let mut t = Tally::default();
            for_each_perm_with_first(n, first, |p| f(p, &mut t));
            t
        })
        .reduce(Tally::default, Tally::merge)
}

/// Bernoulli weight `p^k (1-p)^(n-k)` for each `k`.
fn bernoulli_weights(n: usize, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
        .collect()
}

/// Exact law of `Y` by exhaustive enumeration, or by truncated series for the
/// Poisson-type processes.
pub fn enumerate_law(cfg: &ProcessConfig) -> Result<FinitePmf> {
    cfg.build()?;
    match cfg {
        ProcessConfig::Runs { n, m, p } => {
            size_guard("runs", *n, RUNS_MAX_N)?;
            let t = runs_tally(*n, *m, false);
            let w = bernoulli_weights(*n, *p);
            law_from(t.weighted(|k, c| c as f64 * w[k as usize]))
        }
        ProcessConfig::Perm { n, tau } => {
            size_guard("perm", *n, PERM_MAX_N)?;
            let pp = PermPattern::new(*n, tau)?;
            let t = tally_perms(*n, |pi, t| t.add(pp.statistic(pi) as i64, 0, 0, 1));
            law_from(t.uniform())
        }
        ProcessConfig::Extrema { n, dim, .. } => {
            if *dim != 1 {
                return Err(Error::Unsupported("extrema enumeration covers dim = 1 only".into()));
            }
            size_guard("extrema", *n, EXTREMA_MAX_N)?;
            let e = Extrema::new(*n, 1, false)?;
            let t = tally_perms(*n, |pi, t| {
                let c: Vec<f64> = pi.iter().map(|&v| v as f64).collect();
                t.add(e.lattice().count_maxima(&c) as i64, 0, 0, 1)
            });
            law_from(t.uniform())
        }
        ProcessConfig::Urn { n, m } => {
            let throws = (*m as u128).checked_pow(*n as u32);
            if throws.is_none_or(|o| o > URN_MAX_THROWS) {
                return Err(Error::Infeasible(format!("urn: m^n exceeds {URN_MAX_THROWS}")));
            }
            let u = UrnUniform::new(*n, *m)?;
            let t = for_each_throw(*n, *m, |x, t| t.add(u.statistic(x) as i64, 0, 0, 1));
            law_from(t.uniform())
        }
        ProcessConfig::Lightbulb { n } => {
            size_guard("lightbulb", *n, LIGHTBULB_MAX_N)?;
            let counts = lightbulb_mask_counts(*n, None);
            let mut t = Tally::default();
            for (mask, &c) in counts.iter().enumerate() {
                if c > 0 {
                    t.add(mask.count_ones() as i64, 0, 0, c);
                }
            }
            law_from(t.uniform())
        }
        ProcessConfig::Graph { n, p } => {
            size_guard("graph", *n, GRAPH_MAX_N)?;
            let t = graph_tally(*n, false);
            let w = bernoulli_weights(n * (n - 1) / 2, *p);
            law_from(t.weighted(|k, c| c as f64 * w[k as usize]))
        }
        ProcessConfig::Poisson { lambda } => poisson_truncated_pmf(*lambda, SERIES_EPS),
        ProcessConfig::CompoundPoisson { lambda, claims, .. } => match claims {
            ClaimSpec::Pmf(z) => compound_truncated_pmf(*lambda, z, SERIES_EPS),
            ClaimSpec::Gamma { .. } => Err(Error::Unsupported("gamma claims have a continuous law".into())),
        },
        ProcessConfig::Coverage { .. } => Err(Error::Unsupported("coverage has a continuous law".into())),
    }
}

/// Exact joint law of `(Y, Y^s)` under the process's coupling, enumerating the
/// base randomness together with the index and any auxiliary choices.
pub fn enumerate_coupling(cfg: &ProcessConfig) -> Result<JointLaw> {
    cfg.build()?;
    let entries = match cfg {
        ProcessConfig::Runs { n, m, p } => {
            size_guard("runs", *n, RUNS_MAX_N)?;
            guard("runs coupling", (1u128 << *n).checked_mul(*n as u128))?;
            let t = runs_tally(*n, *m, true);
            let w = bernoulli_weights(*n, *p);
            let nf = *n as f64;
            t.weighted(|k, c| c as f64 * w[k as usize] / nf)
        }
        ProcessConfig::Perm { n, tau } => {
            size_guard("perm", *n, PERM_MAX_N)?;
            let pp = PermPattern::new(*n, tau)?;
            tally_perms(*n, |pi, t| {
                for alpha in 0..*n {
                    let c = pp.coupled_from(pi, alpha);
                    t.add(c.y as i64, c.y_s as i64, 0, 1);
                }
            })
            .uniform()
        }
        ProcessConfig::Extrema { n, dim, .. } => {
            if *dim != 1 {
                return Err(Error::Unsupported("extrema enumeration covers dim = 1 only".into()));
            }
            size_guard("extrema coupling", *n, EXTREMA_COUPLING_MAX_N)?;
            extrema_coupling(*n)?.uniform()
        }
        ProcessConfig::Urn { n, m } => {
            let throws = (*m as u128).checked_pow(*n as u32);
            guard(
                "urn coupling",
                throws.and_then(|o| o.checked_mul((*n * (*n - 1) * 2) as u128)),
            )?;
            urn_coupling(*n, *m)?
        }
        ProcessConfig::Lightbulb { n } => {
            size_guard("lightbulb", *n, LIGHTBULB_MAX_N)?;
            if n % 2 == 1 {
                return Err(Error::Unsupported(
                    "lightbulb coupling is approximation-only for odd n".into(),
                ));
            }
            lightbulb_coupling(*n).uniform()
        }
        ProcessConfig::Graph { n, p } => {
            size_guard("graph", *n, GRAPH_MAX_N)?;
            let t = graph_tally(*n, true);
            let w = bernoulli_weights(n * (n - 1) / 2, *p);
            let nf = *n as f64;
            t.weighted(|k, c| c as f64 * w[k as usize] / nf)
        }
        ProcessConfig::Poisson { lambda } => {
            let law = poisson_truncated_pmf(*lambda, SERIES_EPS)?;
            law.iter().map(|(y, p)| (y, y + 1.0, p)).collect()
        }
        ProcessConfig::CompoundPoisson { lambda, claims, .. } => match claims {
            ClaimSpec::Pmf(z) => {
                let law = compound_truncated_pmf(*lambda, z, SERIES_EPS)?;
                let zs = z.size_bias()?;
                law.iter()
                    .flat_map(|(y, p)| zs.iter().map(move |(x, q)| (y, y + x, p * q)))
                    .collect()
            }
            ClaimSpec::Gamma { .. } => return Err(Error::Unsupported("gamma claims have a continuous law".into())),
        },
        ProcessConfig::Coverage { .. } => {
            return Err(Error::Unsupported("the coverage coupling is not constructed".into()))
        }
    };
    JointLaw::new(entries)
}

/// Counts over all `2^n` trial strings, classed by the number of ones.
fn runs_tally(n: usize, m: usize, coupled: bool) -> Tally {
    let chunks = 1u64 << n.saturating_sub(10);
    let per = (1u64 << n) / chunks;
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut t = Tally::default();
            let mut xi = vec![false; n];
            for bits in chunk * per..(chunk + 1) * per {
                for (i, b) in xi.iter_mut().enumerate() {
                    *b = bits >> i & 1 == 1;
                }
                let ones = bits.count_ones();
                let y = runs_statistic(&xi, m) as i64;
                if coupled {
                    for alpha in 0..n {
                        let mut forced = xi.clone();
                        (0..m).for_each(|j| forced[(alpha + j) % n] = true);
                        t.add(y, runs_statistic(&forced, m) as i64, ones, 1);
                    }
                } else {
                    t.add(y, 0, ones, 1);
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

/// Calls `f` on every assignment of `n` balls to `m` urns.
fn for_each_throw(n: usize, m: usize, f: impl Fn(&[u32], &mut Tally) + Sync) -> Tally {
    (0..m as u32)
        .into_par_iter()
        .map(|first| {
            let mut t = Tally::default();
            let mut x = vec![0u32; n];
            x[0] = first;
            loop {
                f(&x, &mut t);
                let mut i = 1;
                while i < n {
                    x[i] += 1;
                    if (x[i] as usize) < m {
                        break;
                    }
                    x[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn urn_coupling(n: usize, m: usize) -> Result<Vec<(f64, f64, f64)>> {
    let u = UrnUniform::new(n, m)?;
    let pi = urn_pi(n, m)?;
    // class = occupancy M_I, flag bit marks the relocation branch
    let t = for_each_throw(n, m, |x, t| {
        for i in 0..n {
            let occ = x.iter().filter(|&&v| v == x[i]).count() - 1;
            for j in (0..n).filter(|&j| j != i) {
                let moved = u.coupled_from(x, i, true, j);
                let stay = u.coupled_from(x, i, false, j);
                t.add(moved.y as i64, moved.y_s as i64, (occ as u32) << 1 | 1, 1);
                t.add(stay.y as i64, stay.y_s as i64, (occ as u32) << 1, 1);
            }
        }
    });
    let denom = (m as f64).powi(n as i32) * n as f64 * (n - 1) as f64;
    Ok(t.weighted(|cl, c| {
        let p = pi[(cl >> 1) as usize];
        let b = if cl & 1 == 1 { p } else { 1.0 - p };
        c as f64 * b / denom
    }))
}

/// Number of stage-subset sequences ending in each on-mask; stage `skip` is left out.
fn lightbulb_mask_counts(n: usize, skip: Option<usize>) -> Vec<u128> {
    let size = 1usize << n;
    let subsets: Vec<Vec<usize>> = (0..=n)
        .map(|r| (0..size).filter(|s| s.count_ones() as usize == r).collect())
        .collect();
    let mut cnt = vec![0u128; size];
    cnt[0] = 1;
    for (r, stage) in subsets.iter().enumerate().skip(1) {
        if Some(r) == skip {
            continue;
        }
        let mut next = vec![0u128; size];
        for (mask, &c) in cnt.iter().enumerate() {
            if c > 0 {
                for &s in stage {
                    next[mask ^ s] += c;
                }
            }
        }
        cnt = next;
    }
    cnt
}

/// Units: (other-stage outcome, stage-n/2 subset, `I`, `J`), with the `J`
/// choice spread evenly when bulb `I` is already on.
fn lightbulb_coupling(n: usize) -> Tally {
    let half = n / 2;
    let others = lightbulb_mask_counts(n, Some(half));
    let mut t = Tally::default();
    for (base, &c) in others.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for s in (0usize..1 << n).filter(|s| s.count_ones() as usize == half) {
            let on = base ^ s;
            let y = on.count_ones() as i64;
            for i in 0..n {
                if on >> i & 1 == 1 {
                    t.add(y, y, 0, c * half as u128);
                    continue;
                }
                for j in (0..n).filter(|&j| (s >> j & 1) != (s >> i & 1)) {
                    let ys = if on >> j & 1 == 1 { y } else { y + 2 };
                    t.add(y, ys, 0, c);
                }
            }
        }
    }
    t
}

/// Counts over all edge subsets, classed by edge count.
fn graph_tally(n: usize, coupled: bool) -> Tally {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let e = pairs.len();
    let mut t = Tally::default();
    for bits in 0u64..1 << e {
        let mut degree = vec![0u32; n];
        let mut edges = Vec::new();
        for (k, &(u, v)) in pairs.iter().enumerate() {
            if bits >> k & 1 == 1 {
                degree[u] += 1;
                degree[v] += 1;
                edges.push((u as u32, v as u32));
            }
        }
        let class = bits.count_ones();
        if coupled {
            for v in 0..n {
                let c = GraphIso::coupled_from(&edges, &degree, v);
                t.add(c.y as i64, c.y_s as i64, class, 1);
            }
        } else {
            let y = degree.iter().filter(|&&d| d == 0).count() as i64;
            t.add(y, 0, class, 1);
        }
    }
    t
}

/// Relative orders of the `n` base values and three fresh values, the fresh
/// center being the largest of the three, for every center `I`.
fn extrema_coupling(n: usize) -> Result<Tally> {
    let e = Extrema::new(n, 1, false)?;
    let lat = e.lattice();
    let k = n + 3;
    guard(
        "extrema coupling",
        factorial(k as u64).and_then(|f| f.checked_mul(n as u128)),
    )?;
    Ok(tally_perms(k, |pi, t| {
        if !(pi[n] > pi[n + 1] && pi[n] > pi[n + 2]) {
            return;
        }
        let base: Vec<f64> = pi[..n].iter().map(|&v| v as f64).collect();
        let y = lat.count_maxima(&base) as i64;
        let mut cfg = base.clone();
        for i in 0..n {
            cfg.copy_from_slice(&base);
            // closed neighborhood order: center, then lattice neighbors
            cfg[i] = pi[n] as f64;
            for (slot, &w) in lat.neighbors(i).iter().enumerate() {
                cfg[w] = pi[n + 1 + slot] as f64;
            }
            t.add(y, lat.count_maxima(&cfg) as i64, 0, 1);
        }
    }))
}

/// Mean and variance of an exact law, for comparison with closed forms.
pub fn law_moments(pmf: &FinitePmf) -> (f64, f64) {
    let m = pmf.moments();
    (m.mean, m.variance)
}

/// Number of equally likely stage outcomes behind the lightbulb law.
pub fn lightbulb_outcomes(n: usize) -> Option<u128> {
    (1..=n as u64).try_fold(1u128, |acc, r| acc.checked_mul(binomial(n as u64, r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pmf(atoms: &[f64], probs: &[f64]) -> FinitePmf {
        FinitePmf::new(atoms.to_vec(), probs.to_vec()).unwrap()
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut seen = std::collections::HashSet::new();
        for first in 0..5 {
            for_each_perm_with_first(5, first, |p| {
                assert_eq!(p[0] as usize, first);
                assert!(seen.insert(p.to_vec()));
            });
        }
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn small_laws() {
        let g = enumerate_law(&ProcessConfig::Graph { n: 2, p: 0.3 }).unwrap();
        assert!(g.tv_distance(&pmf(&[0.0, 2.0], &[0.3, 0.7])) < 1e-15);
        let r = enumerate_law(&ProcessConfig::Runs { n: 4, m: 2, p: 0.5 }).unwrap();
        assert!(r.tv_distance(&pmf(&[0.0, 1.0, 2.0, 4.0], &[7.0 / 16.0, 0.25, 0.25, 1.0 / 16.0])) < 1e-15);
        let b = enumerate_law(&ProcessConfig::Lightbulb { n: 2 }).unwrap();
        assert_eq!(b, FinitePmf::point_mass(1.0));
        let b = enumerate_law(&ProcessConfig::Lightbulb { n: 4 }).unwrap();
        assert!(b.tv_distance(&pmf(&[0.0, 2.0, 4.0], &[0.125, 0.75, 0.125])) < 1e-15);
        assert_eq!(lightbulb_outcomes(4), Some(4 * 6 * 4));
    }

    #[test]
    fn small_couplings() {
        let u = enumerate_coupling(&ProcessConfig::Urn { n: 2, m: 2 }).unwrap();
        assert_eq!(u.pairs.len(), 2);
        assert_eq!((u.pairs[0].0, u.pairs[0].1), (0.0, 2.0));
        assert_eq!((u.pairs[1].0, u.pairs[1].1), (2.0, 2.0));
        assert_relative_eq!(u.pairs[0].2, 0.5, epsilon = 1e-15);
        let b = enumerate_coupling(&ProcessConfig::Lightbulb { n: 2 }).unwrap();
        assert_eq!(b.pairs, vec![(1.0, 1.0, 1.0)]);
        assert!(matches!(
            enumerate_coupling(&ProcessConfig::Lightbulb { n: 5 }),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn coupling_marginals_are_size_biased() {
        let cfgs = [
            ProcessConfig::Runs { n: 5, m: 2, p: 0.3 },
            ProcessConfig::Perm {
                n: 6,
                tau: vec![1, 2, 3],
            },
            ProcessConfig::Perm {
                n: 6,
                tau: vec![1, 3, 2],
            },
            ProcessConfig::Extrema {
                n: 5,
                dim: 1,
                assume_monotone: false,
            },
            ProcessConfig::Urn { n: 4, m: 3 },
            ProcessConfig::Lightbulb { n: 6 },
            ProcessConfig::Graph { n: 4, p: 0.4 },
            ProcessConfig::Poisson { lambda: 2.0 },
            ProcessConfig::CompoundPoisson {
                lambda: 1.5,
                claims: ClaimSpec::Pmf(pmf(&[1.0, 2.5], &[0.6, 0.4])),
                m: 2.0,
            },
        ];
        for c in cfgs {
            let law = enumerate_law(&c).unwrap();
            let joint = enumerate_coupling(&c).unwrap();
            assert!(joint.marginal_y().unwrap().tv_distance(&law) < 1e-12, "{c:?}");
            let tv = joint.marginal_ys().unwrap().tv_distance(&law.size_bias().unwrap());
            assert!(tv < 1e-12, "{c:?}: {tv}");
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(
            enumerate_law(&ProcessConfig::Runs { n: 30, m: 2, p: 0.5 }),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            enumerate_law(&ProcessConfig::Urn { n: 10, m: 10 }),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            enumerate_coupling(&ProcessConfig::Extrema {
                n: 8,
                dim: 1,
                assume_monotone: false
            }),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            enumerate_law(&ProcessConfig::Graph { n: 6, p: 2.0 }),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn joint_law_json() {
        let j = JointLaw::new(vec![(0.0, 1.0, 0.25), (1.0, 2.0, 0.75)]).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(s, r#"{"pairs":[[0.0,1.0,0.25],[1.0,2.0,0.75]]}"#);
        assert_eq!(serde_json::from_str::<JointLaw>(&s).unwrap(), j);
        assert!(JointLaw::new(vec![(0.0, 1.0, 0.5)]).is_err());
    }
}
