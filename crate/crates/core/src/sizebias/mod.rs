//! Size-bias coupling machinery shared by the concrete processes.

mod audit;
mod local;

pub use audit::{audit_characterization, AuditAccumulator, CharFn, CharResidual, CouplingAudit, Offending};
pub use local::{local_dependence_bias, DependencySets, DirectionKernel, Rebiased};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distcore::RngStream;
use crate::error::{Error, Result};

/// One draw of `(Y, Y^s)` from a coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub y: f64,
    pub y_s: f64,
}

impl CoupledPair {
    pub fn new(y: f64, y_s: f64) -> Self {
        Self { y, y_s }
    }

    pub fn diff(&self) -> f64 {
        self.y_s - self.y
    }
}

/// A source of coupled pairs.
pub trait CoupledSampler: Send + Sync {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair;
}

impl<F: Fn(&mut RngStream) -> CoupledPair + Send + Sync> CoupledSampler for F {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        self(rng)
    }
}

/// Picks `alpha` with probability `weights[alpha] / sum(weights)`.
pub fn choose_index(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("no weights".into()));
    }
    let first = weights[0];
    if first > 0.0 && weights.iter().all(|&w| w == first) {
        return Ok(rng.random_range(0..weights.len()));
    }
    let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidArgument(format!("weights: {e}")))?;
    Ok(dist.sample(rng))
}
