use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{CoverageCtx, TailBound};
use crate::distcore::RngStream;
use crate::error::Result;

/// Which coverage statistic plays the role of `Y`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageStatistic {
    /// Covered volume `V`.
    #[default]
    Volume,
    /// Non-isolated balls `n - S`.
    Nonisolated,
}

/// Uniform bucketing of the torus, used when cells can be at least `rho` wide.
struct CellGrid {
    d: usize,
    side: f64,
    k: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl CellGrid {
    fn build(pts: &[f64], d: usize, side: f64, rho: f64) -> Option<Self> {
        let k = (side / rho).floor() as usize;
        let total = k.checked_pow(d as u32)?;
        if k < 3 || total > 1 << 22 {
            return None;
        }
        let n = pts.len() / d;
        let mut cell_of = vec![0usize; n];
        let mut count = vec![0usize; total + 1];
        for i in 0..n {
            let c = Self::cell_index(&pts[i * d..(i + 1) * d], side, k);
            cell_of[i] = c;
            count[c + 1] += 1;
        }
        for c in 0..total {
            count[c + 1] += count[c];
        }
        let mut fill = count.clone();
        let mut items = vec![0usize; n];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c]] = i;
            fill[c] += 1;
        }
        Some(Self {
            d,
            side,
            k,
            start: count,
            items,
        })
    }

    fn coord(x: f64, side: f64, k: usize) -> usize {
        ((x / side * k as f64) as usize).min(k - 1)
    }

    fn cell_index(x: &[f64], side: f64, k: usize) -> usize {
        x.iter().rev().fold(0, |acc, &xi| acc * k + Self::coord(xi, side, k))
    }

    /// Calls `f` on every point in the `3^d` cells around `x`; stops when `f` returns true.
    fn any_near(&self, x: &[f64], mut f: impl FnMut(usize) -> bool) -> bool {
        let base: Vec<usize> = x.iter().map(|&xi| Self::coord(xi, self.side, self.k)).collect();
        let combos = 3usize.pow(self.d as u32);
        for combo in 0..combos {
            let mut cell = 0;
            let mut rest = combo;
            let mut stride = 1;
            for &b in base.iter() {
                let off = rest % 3;
                rest /= 3;
                let c = (b + self.k + off - 1) % self.k;
                cell += c * stride;
                stride *= self.k;
            }
            if self.items[self.start[cell]..self.start[cell + 1]].iter().any(|&j| f(j)) {
                return true;
            }
        }
        false
    }
}

#[inline]
fn torus_dist2(a: &[f64], b: &[f64], side: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let dx = (x - y).abs();
            let dx = dx.min(side - dx);
            dx * dx
        })
        .sum()
}

/// Covered volume `V` and isolated count `S` for `n` uniform centers on the
/// `d`-dimensional torus of volume `n`.
///
/// Ball `i` is isolated when no other center lies in the closed ball of
/// radius `rho` about it. On the line `V` is exact; for `d >= 2` it is a
/// hit-or-miss estimate from `points_per_unit * n` uniform points.
pub fn coverage_sample(
    n: usize,
    rho: f64,
    d: u32,
    points_per_unit: usize,
    rng: &mut RngStream,
) -> Result<(f64, usize)> {
    if !(1..=3).contains(&d) {
        return Err(invalid(format!("coverage supports d in 1..=3, got {d}")));
    }
    if n == 0 || !(rho > 0.0) {
        return Err(invalid(format!(
            "coverage needs n >= 1 and rho > 0, got n = {n}, rho = {rho}"
        )));
    }
    let du = d as usize;
    let side = (n as f64).powf(1.0 / d as f64);
    let pts: Vec<f64> = (0..n * du).map(|_| rng.random::<f64>() * side).collect();
    let rho2 = rho * rho;
    let grid = CellGrid::build(&pts, du, side, rho);
    let at = |i: usize| &pts[i * du..(i + 1) * du];

    let s = (0..n)
        .filter(|&i| {
            let near = |j: usize| j != i && torus_dist2(at(i), at(j), side) <= rho2;
            match &grid {
                Some(g) => !g.any_near(at(i), near),
                None => !(0..n).any(near),
            }
        })
        .count();

    let v = if d == 1 {
        let mut xs = pts.clone();
        xs.sort_by(f64::total_cmp);
        let two_rho = 2.0 * rho;
        let mut total: f64 = xs.windows(2).map(|w| (w[1] - w[0]).min(two_rho)).sum();
        total += (xs[0] + side - xs[n - 1]).min(two_rho);
        total.min(side)
    } else {
        if points_per_unit == 0 {
            return Err(invalid("points_per_unit must be positive"));
        }
        let m = points_per_unit * n;
        let mut q = vec![0.0; du];
        let mut hits = 0usize;
        for _ in 0..m {
            q.iter_mut().for_each(|x| *x = rng.random::<f64>() * side);
            let covered = |j: usize| torus_dist2(&q, at(j), side) <= rho2;
            let hit = match &grid {
                Some(g) => g.any_near(&q, covered),
                None => (0..n).any(covered),
            };
            hits += hit as usize;
        }
        n as f64 * hits as f64 / m as f64
    };
    Ok((v, s))
}

/// Boolean model on the torus of volume `n`, simulated without a coupling.
#[derive(Debug, Clone)]
pub struct Coverage {
    n: usize,
    rho: f64,
    d: u32,
    kappa_d: Option<u32>,
    statistic: CoverageStatistic,
    points_per_unit: usize,
    assume_monotone: bool,
    info: ProcessInfo,
}

impl Coverage {
    pub fn new(
        n: usize,
        rho: f64,
        d: u32,
        kappa_d: Option<u32>,
        statistic: CoverageStatistic,
        points_per_unit: usize,
        assume_monotone: bool,
    ) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(invalid(format!("coverage supports d in 1..=3, got {d}")));
        }
        if d >= 2 && points_per_unit == 0 {
            return Err(invalid("points_per_unit must be positive"));
        }
        // kappa_d only enters the non-isolated bound
        let kappa = match (statistic, kappa_d) {
            (CoverageStatistic::Volume, None) if d >= 2 => Some(0),
            _ => kappa_d,
        };
        let ctx = CoverageCtx::new(n as u64, rho, d, kappa).map_err(|e| invalid(e.to_string()))?;
        let m = ctx.moments().map_err(|e| invalid(e.to_string()))?;
        let params = match statistic {
            CoverageStatistic::Volume => ctx.volume_bound_params(&m, assume_monotone),
            CoverageStatistic::Nonisolated => ctx.nonisolated_bound_params(&m, assume_monotone),
        }
        .map_err(|e| invalid(e.to_string()))?;
        let mut notes = vec!["coupling cited, not sampled: plain simulation only".to_string()];
        if d >= 2 && statistic == CoverageStatistic::Volume {
            notes.push(format!("V estimated from {} points per unit volume", points_per_unit));
        }
        if assume_monotone {
            notes.push("left tail uses an assumed monotone coupling".into());
        }
        Ok(Self {
            n,
            rho,
            d,
            kappa_d,
            statistic,
            points_per_unit,
            assume_monotone,
            info: ProcessInfo {
                process: "coverage".into(),
                mu: params.mu,
                sigma2: params.sigma2,
                c: Some(params.c),
                monotone: false,
                supports_left_tail: assume_monotone,
                coupling_exact: false,
                bound: Some(TailBound::main(params)),
                notes,
            },
        })
    }

    pub fn statistic(&self) -> CoverageStatistic {
        self.statistic
    }

    /// Variance of the hit-or-miss volume estimate given `V`, zero on the line.
    pub fn estimator_variance(&self, v: f64) -> f64 {
        if self.d == 1 {
            return 0.0;
        }
        let nf = self.n as f64;
        let frac = (v / nf).clamp(0.0, 1.0);
        nf * nf * frac * (1.0 - frac) / (self.points_per_unit as f64 * nf)
    }
}

impl Process for Coverage {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Coverage {
            n: self.n,
            rho: self.rho,
            d: self.d,
            kappa_d: self.kappa_d,
            statistic: self.statistic,
            points_per_unit: self.points_per_unit,
            assume_monotone: self.assume_monotone,
        }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        let (v, s) = coverage_sample(self.n, self.rho, self.d, self.points_per_unit, rng)
            .expect("parameters validated at construction");
        match self.statistic {
            CoverageStatistic::Volume => v,
            CoverageStatistic::Nonisolated => (self.n - s) as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn line_volume_mean() {
        let c = Coverage::new(4, 0.5, 1, None, CoverageStatistic::Volume, 4096, false).unwrap();
        assert_relative_eq!(c.info().mu, 2.734375, epsilon = 1e-12);
        let mut rng = RngStream::new(10, 0);
        let vs: Vec<f64> = (0..200_000).map(|_| c.sample_y(&mut rng)).collect();
        let (m, se) = mean_se(&vs);
        assert!((m - 2.734375).abs() < 4.0 * se, "{m} +- {se}");
    }

    #[test]
    fn isolated_count_mean() {
        let c = Coverage::new(16, 0.5, 1, None, CoverageStatistic::Nonisolated, 4096, false).unwrap();
        let mut rng = RngStream::new(11, 0);
        let ys: Vec<f64> = (0..100_000).map(|_| c.sample_y(&mut rng)).collect();
        let (m, se) = mean_se(&ys);
        assert!((m - c.info().mu).abs() < 4.0 * se);
        assert_eq!(c.info().c, Some(3.0));
    }

    #[test]
    fn large_radius_leaves_nothing_isolated() {
        let mut rng = RngStream::new(12, 0);
        for d in 1..=3 {
            for _ in 0..50 {
                let side = 8f64.powf(1.0 / d as f64);
                let (v, s) = coverage_sample(8, side, d, 16, &mut rng).unwrap();
                assert_eq!(s, 0);
                assert_relative_eq!(v, 8.0, epsilon = 1e-9);
            }
        }
        assert!(coverage_sample(8, 0.5, 4, 16, &mut rng).is_err());
    }

    #[test]
    fn cell_grid_agrees_with_brute_force() {
        let mut rng = RngStream::new(13, 0);
        for d in 1..=3usize {
            let n = 400;
            let side = (n as f64).powf(1.0 / d as f64);
            let rho = 0.6;
            let pts: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * side).collect();
            let g = CellGrid::build(&pts, d, side, rho).expect("grid fits");
            for _ in 0..500 {
                let q: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * side).collect();
                let near = |j: usize| torus_dist2(&q, &pts[j * d..(j + 1) * d], side) <= rho * rho;
                assert_eq!(g.any_near(&q, near), (0..n).any(near));
            }
        }
    }

    #[test]
    fn plane_volume_mean() {
        let c = Coverage::new(64, 0.5, 2, None, CoverageStatistic::Volume, 256, false).unwrap();
        let mut rng = RngStream::new(14, 0);
        let vs: Vec<f64> = (0..4000).map(|_| c.sample_y(&mut rng)).collect();
        let (m, se) = mean_se(&vs);
        assert!((m - c.info().mu).abs() < 4.0 * se);
        assert!(Coverage::new(64, 0.5, 2, None, CoverageStatistic::Nonisolated, 256, false).is_err());
    }
}
