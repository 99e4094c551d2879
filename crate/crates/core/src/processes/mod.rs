//! The example processes: statistic, closed-form parameters and coupled samplers.

mod coverage;
mod extrema;
mod graph;
mod lightbulb;
mod perm;
mod poisson;
mod runs;
mod urn;

pub use coverage::{coverage_sample, Coverage, CoverageStatistic};
pub use extrema::{extrema_moments, Extrema, Lattice};
pub use graph::{graph_moments, GraphIso};
pub use lightbulb::{lightbulb_moments, Lightbulb};
pub use perm::{perm_indicator_overlaps, perm_moments, perm_statistic, window_in_order, PermPattern};
pub use poisson::{ClaimSpec, CompoundPoisson, PoissonProcess};
pub use runs::{runs_moments, runs_statistic, Runs};
pub use urn::{urn_moments, urn_pi, UrnUniform};

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundParams, TailBound};
use crate::distcore::RngStream;
use crate::error::{Error, Result};
use crate::sizebias::CoupledSampler;

pub(crate) fn default_points_per_unit() -> usize {
    4096
}

pub(crate) fn default_m_factor() -> f64 {
    2.0
}

/// Selects one process and its parameters. Parses from JSON tagged by `"process"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProcessConfig {
    /// Occurrences of the relative order `tau` in cyclic windows of a uniform permutation.
    Perm {
        n: usize,
        tau: Vec<usize>,
    },
    /// Cyclic `m`-runs of ones in `n` Bernoulli(`p`) trials.
    Runs {
        n: usize,
        m: usize,
        p: f64,
    },
    /// Strict local maxima of i.i.d. uniforms on the discrete torus of side `n`.
    Extrema {
        n: usize,
        dim: u32,
        #[serde(default)]
        assume_monotone: bool,
    },
    /// Non-isolated balls when `n` balls land uniformly in `m` urns.
    Urn {
        n: usize,
        m: usize,
    },
    /// Bulbs on after `n` days of uniform `r`-subset toggles.
    Lightbulb {
        n: usize,
    },
    /// Isolated vertices of `G(n, p)`.
    Graph {
        n: usize,
        p: f64,
    },
    /// Boolean model of `n` balls on the torus of volume `n`.
    Coverage {
        n: usize,
        rho: f64,
        d: u32,
        #[serde(default)]
        kappa_d: Option<u32>,
        #[serde(default)]
        statistic: CoverageStatistic,
        #[serde(default = "default_points_per_unit")]
        points_per_unit: usize,
        #[serde(default)]
        assume_monotone: bool,
    },
    /// `sum_{i <= N} Z_i` with `N ~ Poisson(lambda)`.
    #[serde(rename = "cpoisson")]
    CompoundPoisson {
        lambda: f64,
        claims: ClaimSpec,
        #[serde(rename = "M", default = "default_m_factor")]
        m: f64,
    },
    Poisson {
        lambda: f64,
    },
}

impl ProcessConfig {
    pub const NAMES: [&'static str; 9] = [
        "perm",
        "runs",
        "extrema",
        "urn",
        "lightbulb",
        "graph",
        "coverage",
        "cpoisson",
        "poisson",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProcessConfig::Perm { .. } => "perm",
            ProcessConfig::Runs { .. } => "runs",
            ProcessConfig::Extrema { .. } => "extrema",
            ProcessConfig::Urn { .. } => "urn",
            ProcessConfig::Lightbulb { .. } => "lightbulb",
            ProcessConfig::Graph { .. } => "graph",
            ProcessConfig::Coverage { .. } => "coverage",
            ProcessConfig::CompoundPoisson { .. } => "cpoisson",
            ProcessConfig::Poisson { .. } => "poisson",
        }
    }

    /// Validates the parameters and constructs the process.
    pub fn build(&self) -> Result<Box<dyn Process>> {
        Ok(match self {
            ProcessConfig::Perm { n, tau } => Box::new(PermPattern::new(*n, tau)?),
            ProcessConfig::Runs { n, m, p } => Box::new(Runs::new(*n, *m, *p)?),
            ProcessConfig::Extrema {
                n,
                dim,
                assume_monotone,
            } => Box::new(Extrema::new(*n, *dim, *assume_monotone)?),
            ProcessConfig::Urn { n, m } => Box::new(UrnUniform::new(*n, *m)?),
            ProcessConfig::Lightbulb { n } => Box::new(Lightbulb::new(*n)?),
            ProcessConfig::Graph { n, p } => Box::new(GraphIso::new(*n, *p)?),
            ProcessConfig::Coverage {
                n,
                rho,
                d,
                kappa_d,
                statistic,
                points_per_unit,
                assume_monotone,
            } => Box::new(Coverage::new(
                *n,
                *rho,
                *d,
                *kappa_d,
                *statistic,
                *points_per_unit,
                *assume_monotone,
            )?),
            ProcessConfig::CompoundPoisson { lambda, claims, m } => {
                Box::new(CompoundPoisson::new(*lambda, claims.clone(), *m)?)
            }
            ProcessConfig::Poisson { lambda } => Box::new(PoissonProcess::new(*lambda)?),
        })
    }

    pub fn info(&self) -> Result<ProcessInfo> {
        Ok(self.build()?.info().clone())
    }
}

/// Analytic summary of a process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessInfo {
    pub process: String,
    pub mu: f64,
    pub sigma2: f64,
    /// Almost sure bound on `|Y^s - Y|`, when one exists.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Whether the coupling satisfies `Y^s >= Y`.
    pub monotone: bool,
    pub supports_left_tail: bool,
    /// Whether the sampler realizes the coupling behind the bound.
    pub coupling_exact: bool,
    /// `None` when the variance vanishes and no bound applies.
    pub bound: Option<TailBound>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ProcessInfo {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn bound_params(&self) -> Option<BoundParams> {
        match &self.bound {
            Some(TailBound::Main { params, .. }) => Some(*params),
            _ => None,
        }
    }
}

/// A process that can be simulated.
pub trait Process: Send + Sync {
    fn config(&self) -> ProcessConfig;

    fn info(&self) -> &ProcessInfo;

    fn sample_y(&self, rng: &mut RngStream) -> f64;

    /// The coupled sampler, if this process has one.
    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        None
    }
}

impl std::fmt::Debug for dyn Process {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Process({:?})", self.config())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

pub(crate) fn check_prob(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 1), got {p}")))
    }
}

/// Bernoulli(`p`) bit through a 64-bit threshold; fair coins use raw bits.
#[inline]
pub(crate) fn bernoulli_threshold(p: f64) -> u64 {
    (p * 18_446_744_073_709_551_616.0) as u64
}
