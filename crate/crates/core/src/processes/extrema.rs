use rand::Rng;

use super::{invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{BoundFamily, BoundParams, TailBound};
use crate::distcore::RngStream;
use crate::error::Result;
use crate::sizebias::{local_dependence_bias, CoupledPair, CoupledSampler, DependencySets};

/// The discrete torus `(Z / n)^dim` with nearest-neighbor edges.
#[derive(Debug, Clone)]
pub struct Lattice {
    side: usize,
    dim: u32,
    /// `2 dim` neighbors per vertex, row-major.
    nbrs: Vec<usize>,
}

impl Lattice {
    pub fn new(side: usize, dim: u32) -> Result<Self> {
        let n = side
            .checked_pow(dim)
            .filter(|&v| v <= 1 << 26)
            .ok_or_else(|| invalid(format!("lattice {side}^{dim} is too large")))?;
        let k = 2 * dim as usize;
        let mut nbrs = Vec::with_capacity(n * k);
        for v in 0..n {
            let mut stride = 1;
            for _ in 0..dim {
                let coord = (v / stride) % side;
                let up = (coord + 1) % side;
                let down = (coord + side - 1) % side;
                nbrs.push(v - coord * stride + up * stride);
                nbrs.push(v - coord * stride + down * stride);
                stride *= side;
            }
        }
        Ok(Self { side, dim, nbrs })
    }

    pub fn len(&self) -> usize {
        self.nbrs.len() / (2 * self.dim as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.nbrs.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        let k = 2 * self.dim as usize;
        &self.nbrs[v * k..(v + 1) * k]
    }

    /// Closed neighborhoods, center first.
    pub fn closed_neighborhoods(&self) -> DependencySets {
        let sets = (0..self.len())
            .map(|v| std::iter::once(v).chain(self.neighbors(v).iter().copied()).collect())
            .collect();
        DependencySets::new(sets, self.len()).expect("neighbors lie on the lattice")
    }

    #[inline]
    pub fn is_local_max(&self, c: &[f64], v: usize) -> bool {
        self.neighbors(v).iter().all(|&w| c[v] > c[w])
    }

    pub fn count_maxima(&self, c: &[f64]) -> usize {
        (0..self.len()).filter(|&v| self.is_local_max(c, v)).count()
    }
}

/// `mu = N / (2p + 1)` and `sigma^2 = N (4p^2 - p - 1) / ((2p + 1)^2 (4p + 1))`
/// with `N = n^p` the number of vertices.
pub fn extrema_moments(side: usize, dim: u32) -> (f64, f64) {
    let nv = (side as f64).powi(dim as i32);
    let p = dim as f64;
    let mu = nv / (2.0 * p + 1.0);
    let s2 = nv * (4.0 * p * p - p - 1.0) / ((2.0 * p + 1.0).powi(2) * (4.0 * p + 1.0));
    (mu, s2)
}

/// Strict local maxima of i.i.d. uniforms on the torus lattice.
#[derive(Debug, Clone)]
pub struct Extrema {
    lattice: Lattice,
    deps: DependencySets,
    assume_monotone: bool,
    info: ProcessInfo,
}

impl Extrema {
    pub fn new(side: usize, dim: u32, assume_monotone: bool) -> Result<Self> {
        if side < 5 || dim == 0 {
            return Err(invalid(format!(
                "extrema needs side n >= 5 and dim >= 1, got n = {side}, dim = {dim}"
            )));
        }
        let lattice = Lattice::new(side, dim)?;
        let (mu, sigma2) = extrema_moments(side, dim);
        let p = dim as f64;
        let c = 2.0 * p * p + 2.0 * p + 1.0;
        let params = BoundParams::new(mu, sigma2, c, assume_monotone, BoundFamily::ThmMain)?;
        let mut notes = vec![format!("N = n^dim = {} vertices", lattice.len())];
        if assume_monotone {
            notes.push("left tail uses an assumed monotone coupling".into());
        }
        Ok(Self {
            deps: lattice.closed_neighborhoods(),
            lattice,
            assume_monotone,
            info: ProcessInfo {
                process: "extrema".into(),
                mu,
                sigma2,
                c: Some(c),
                monotone: false,
                supports_left_tail: assume_monotone,
                coupling_exact: true,
                bound: Some(TailBound::main(params)),
                notes,
            },
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn draw(&self, rng: &mut RngStream) -> Vec<f64> {
        (0..self.lattice.len()).map(|_| rng.random::<f64>()).collect()
    }

    /// `2p + 1` uniforms conditioned on the first being the strict maximum.
    pub fn conditional_neighborhood(&self, rng: &mut RngStream) -> Vec<f64> {
        let k = 2 * self.lattice.dim as usize + 1;
        loop {
            let mut vals: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
            let (imax, &vmax) = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            if vals.iter().filter(|&&v| v == vmax).count() > 1 {
                continue;
            }
            vals.swap(0, imax);
            return vals;
        }
    }

    /// Coupled pair from a given configuration and index.
    pub fn coupled_from(&self, c: &[f64], alpha: usize, rng: &mut RngStream) -> (CoupledPair, Vec<f64>) {
        let lat = &self.lattice;
        let x = |cfg: &[f64], b: usize| lat.is_local_max(cfg, b) as u8 as f64;
        let kernel = |_a: usize, r: &mut RngStream| self.conditional_neighborhood(r);
        let r = local_dependence_bias(c, alpha, &kernel, &self.deps, x, |v| (0.0..1.0).contains(v), None, rng)
            .expect("kernel values are uniforms on [0, 1)");
        (CoupledPair::new(r.y, r.y_s), r.config)
    }
}

impl CoupledSampler for Extrema {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        let c = self.draw(rng);
        let alpha = rng.random_range(0..self.lattice.len());
        self.coupled_from(&c, alpha, rng).0
    }
}

impl Process for Extrema {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Extrema {
            n: self.lattice.side,
            dim: self.lattice.dim,
            assume_monotone: self.assume_monotone,
        }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        self.lattice.count_maxima(&self.draw(rng)) as f64
    }

    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        Some(self)
    }
}
