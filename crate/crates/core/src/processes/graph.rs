use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{check_prob, invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{GraphBoundCtx, TailBound};
use crate::distcore::RngStream;
use crate::error::Result;
use crate::sizebias::{CoupledPair, CoupledSampler};

/// `mu = n (1-p)^(n-1)` and `sigma^2 = mu (1 + n p (1-p)^(n-2) - (1-p)^(n-2))`.
pub fn graph_moments(n: usize, p: f64) -> Result<(f64, f64)> {
    let ctx = GraphBoundCtx::new(n as u64, p).map_err(|e| invalid(e.to_string()))?;
    Ok((ctx.mu, ctx.sigma2))
}

/// Isolated vertices of `G(n, p)`.
#[derive(Debug, Clone)]
pub struct GraphIso {
    n: usize,
    p: f64,
    skip: Geometric,
    info: ProcessInfo,
}

/// Edge list and degrees of one draw.
struct Draw {
    edges: Vec<(u32, u32)>,
    degree: Vec<u32>,
}

impl GraphIso {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_prob("p", p)?;
        if !(2..=1 << 20).contains(&n) {
            return Err(invalid(format!("graph needs 2 <= n <= 2^20, got {n}")));
        }
        let ctx = GraphBoundCtx::new(n as u64, p).map_err(|e| invalid(e.to_string()))?;
        Ok(Self {
            n,
            p,
            skip: Geometric::new(p).map_err(|e| invalid(e.to_string()))?,
            info: ProcessInfo {
                process: "graph".into(),
                mu: ctx.mu,
                sigma2: ctx.sigma2,
                c: None,
                monotone: true,
                supports_left_tail: true,
                coupling_exact: true,
                bound: Some(TailBound::Graph { ctx }),
                notes: Vec::new(),
            },
        })
    }

    /// Walks the upper triangle in row-major order, jumping geometric gaps between edges.
    fn draw(&self, rng: &mut RngStream) -> Draw {
        let n = self.n;
        let mut edges = Vec::new();
        let mut degree = vec![0u32; n];
        let (mut row, mut col) = (0usize, 0usize);
        let mut gap = self.skip.sample(rng);
        loop {
            // the next edge sits `gap` slots past (row, col)
            let mut step = gap;
            loop {
                let rem = n - 1 - row - col;
                if step < rem as u64 {
                    col += step as usize;
                    break;
                }
                step -= rem as u64;
                row += 1;
                col = 0;
                if row >= n - 1 {
                    return Draw { edges, degree };
                }
            }
            let (u, v) = (row, row + 1 + col);
            edges.push((u as u32, v as u32));
            degree[u] += 1;
            degree[v] += 1;
            col += 1;
            if row + 1 + col >= n {
                row += 1;
                col = 0;
                if row >= n - 1 {
                    return Draw { edges, degree };
                }
            }
            gap = self.skip.sample(rng);
        }
    }

    fn isolated(degree: &[u32]) -> usize {
        degree.iter().filter(|&&d| d == 0).count()
    }

    /// `(Y, Y + d_1(v) + 1(d(v) != 0))` for a given vertex `v`, where `d_1(v)`
    /// counts neighbors of `v` of degree one.
    pub fn coupled_from(edges: &[(u32, u32)], degree: &[u32], v: usize) -> CoupledPair {
        let y = Self::isolated(degree);
        let v = v as u32;
        let d1 = edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .filter(|&w| degree[w as usize] == 1)
            .count();
        let y_s = y + d1 + (degree[v as usize] != 0) as usize;
        CoupledPair::new(y as f64, y_s as f64)
    }
}

impl CoupledSampler for GraphIso {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        let Draw { edges, degree } = self.draw(rng);
        let v = rng.random_range(0..self.n);
        Self::coupled_from(&edges, &degree, v)
    }
}

impl Process for GraphIso {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Graph { n: self.n, p: self.p }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        Self::isolated(&self.draw(rng).degree) as f64
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
    fn two_vertices() {
        let (mu, s2) = graph_moments(2, 0.3).unwrap();
        assert_relative_eq!(mu, 1.4, epsilon = 1e-14);
        assert_relative_eq!(s2, 4.0 * 0.3 * 0.7, epsilon = 1e-14);
        assert_eq!(
            GraphIso::coupled_from(&[(0, 1)], &[1, 1], 0),
            CoupledPair::new(0.0, 2.0)
        );
        assert_eq!(GraphIso::coupled_from(&[], &[0, 0], 1), CoupledPair::new(2.0, 2.0));
    }

    #[test]
    fn isolated_vertex_left_alone() {
        // path 0-1-2 plus isolated 3
        let edges = [(0, 1), (1, 2)];
        let deg = [1, 2, 1, 0];
        assert_eq!(GraphIso::coupled_from(&edges, &deg, 3), CoupledPair::new(1.0, 1.0));
        assert_eq!(GraphIso::coupled_from(&edges, &deg, 1), CoupledPair::new(1.0, 4.0));
        assert_eq!(GraphIso::coupled_from(&edges, &deg, 0), CoupledPair::new(1.0, 2.0));
    }

    #[test]
    fn edge_skipping_has_the_right_law() {
        // every pair present with probability p, independently
        let g = GraphIso::new(7, 0.35).unwrap();
        let mut rng = RngStream::new(4, 0);
        let reps = 100_000;
        let mut hits = vec![0u64; 49];
        let mut both = 0u64;
        for _ in 0..reps {
            let d = g.draw(&mut rng);
            let mut present = [false; 49];
            for &(u, v) in &d.edges {
                assert!(u < v && (v as usize) < 7);
                present[u as usize * 7 + v as usize] = true;
            }
            for (k, &p) in present.iter().enumerate() {
                hits[k] += p as u64;
            }
            both += (present[1] && present[5 * 7 + 6]) as u64;
            let total: u32 = d.degree.iter().sum();
            assert_eq!(total as usize, 2 * d.edges.len());
        }
        let se = (0.35 * 0.65 / reps as f64).sqrt();
        for u in 0..7 {
            for v in u + 1..7 {
                assert!(
                    (hits[u * 7 + v] as f64 / reps as f64 - 0.35).abs() < 4.5 * se,
                    "({u},{v})"
                );
            }
        }
        let pb = 0.35 * 0.35;
        assert!((both as f64 / reps as f64 - pb).abs() < 4.5 * (pb * (1.0 - pb) / reps as f64).sqrt());
    }

    #[test]
    fn monotone_coupling() {
        let g = GraphIso::new(50, 0.05).unwrap();
        let mut rng = RngStream::new(7, 0);
        for _ in 0..50_000 {
            assert!(g.sample_coupled(&mut rng).diff() >= 0.0);
        }
    }
}
