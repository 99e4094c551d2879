use crate::distcore::RngStream;
use crate::error::{Error, Result};

/// Neighborhoods `V_alpha` of a sum `Y = sum_alpha X_alpha` of locally
/// dependent indicators, each `X_alpha` a function of the base coordinates in
/// `V_alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencySets {
    sets: Vec<Vec<usize>>,
    users: Vec<Vec<usize>>,
}

impl DependencySets {
    pub fn new(sets: Vec<Vec<usize>>, base_len: usize) -> Result<Self> {
        let mut users = vec![Vec::new(); base_len];
        for (alpha, set) in sets.iter().enumerate() {
            for &g in set {
                if g >= base_len {
                    return Err(Error::InvalidArgument(format!(
                        "V_{alpha} names coordinate {g} of a base of length {base_len}"
                    )));
                }
                users[g].push(alpha);
            }
        }
        Ok(Self { sets, users })
    }

    /// Cyclic windows `{alpha, ..., alpha + m - 1} mod n`.
    pub fn cyclic_windows(n: usize, m: usize) -> Self {
        let sets = (0..n).map(|a| (0..m).map(|j| (a + j) % n).collect()).collect();
        Self::new(sets, n).expect("indices are reduced mod n")
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, alpha: usize) -> &[usize] {
        &self.sets[alpha]
    }

    /// Indices `beta` with `V_beta` meeting `V_alpha`, sorted.
    pub fn footprint(&self, alpha: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.sets[alpha]
            .iter()
            .flat_map(|&g| self.users[g].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `b = max_alpha |footprint(alpha)|`
    pub fn max_overlap(&self) -> usize {
        (0..self.len()).map(|a| self.footprint(a).len()).max().unwrap_or(0)
    }
}

/// Samples the coordinates in `V_alpha` from the base law tilted by `X_alpha`,
/// independently of the base configuration.
pub trait DirectionKernel<V> {
    fn resample(&self, alpha: usize, rng: &mut RngStream) -> Vec<V>;
}

impl<V, F: Fn(usize, &mut RngStream) -> Vec<V>> DirectionKernel<V> for F {
    fn resample(&self, alpha: usize, rng: &mut RngStream) -> Vec<V> {
        self(alpha, rng)
    }
}

/// Output of one rebiasing step.
#[derive(Debug, Clone, PartialEq)]
pub struct Rebiased<V> {
    pub config: Vec<V>,
    /// Indices whose summand was recomputed.
    pub footprint: Vec<usize>,
    pub y: f64,
    pub y_s: f64,
}

/// Replaces the coordinates in `V_alpha` by a kernel draw and recomputes the
/// summands whose neighborhoods meet `V_alpha`.
///
/// `x(config, beta)` evaluates `X_beta`; `in_support` rejects kernel values
/// the base law cannot produce. `y` is the statistic on `base` when the caller
/// already has it.
#[allow(clippy::too_many_arguments)]
pub fn local_dependence_bias<V, K, X, S>(
    base: &[V],
    alpha: usize,
    kernel: &K,
    deps: &DependencySets,
    x: X,
    in_support: S,
    y: Option<f64>,
    rng: &mut RngStream,
) -> Result<Rebiased<V>>
where
    V: Clone,
    K: DirectionKernel<V> + ?Sized,
    X: Fn(&[V], usize) -> f64,
    S: Fn(&V) -> bool,
{
    let coords = deps.set(alpha);
    let fresh = kernel.resample(alpha, rng);
    if fresh.len() != coords.len() {
        return Err(Error::InvalidArgument(format!(
            "kernel returned {} values for a neighborhood of size {}",
            fresh.len(),
            coords.len()
        )));
    }
    let y = y.unwrap_or_else(|| (0..deps.len()).map(|b| x(base, b)).sum());
    let footprint = deps.footprint(alpha);
    let before: f64 = footprint.iter().map(|&b| x(base, b)).sum();
    let mut config = base.to_vec();
    for (&g, v) in coords.iter().zip(fresh) {
        if !in_support(&v) {
            return Err(Error::KernelSupport(g));
        }
        config[g] = v;
    }
    let after: f64 = footprint.iter().map(|&b| x(&config, b)).sum();
    Ok(Rebiased {
        config,
        footprint,
        y,
        y_s: y - before + after,
    })
}
