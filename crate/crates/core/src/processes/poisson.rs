use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use super::{invalid, Process, ProcessConfig, ProcessInfo};
use crate::bounds::{gamma_compound_constants, InfDivCtx, TailBound};
use crate::distcore::{FinitePmf, RngStream};
use crate::error::Result;
use crate::sizebias::{CoupledPair, CoupledSampler};

/// Claim-size law of a compound Poisson sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimSpec {
    /// Shape `alpha`, scale `beta`.
    Gamma {
        alpha: f64,
        beta: f64,
    },
    Pmf(FinitePmf),
}

fn poisson_dist(lambda: f64) -> Result<Poisson<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    Poisson::new(lambda).map_err(|e| invalid(format!("poisson({lambda}): {e}")))
}

#[derive(Debug, Clone)]
enum Claims {
    Gamma {
        alpha: f64,
        beta: f64,
        biased: Gamma<f64>,
    },
    Pmf {
        atoms: Vec<f64>,
        base: WeightedIndex<f64>,
        biased_atoms: Vec<f64>,
        biased: WeightedIndex<f64>,
    },
}

/// `Y = Z_1 + ... + Z_N` with `N ~ Poisson(lambda)`, coupled through `Y^s = Y + Z^s`.
#[derive(Debug, Clone)]
pub struct CompoundPoisson {
    lambda: f64,
    spec: ClaimSpec,
    m: f64,
    count: Poisson<f64>,
    claims: Claims,
    info: ProcessInfo,
}

impl CompoundPoisson {
    pub fn new(lambda: f64, spec: ClaimSpec, m: f64) -> Result<Self> {
        let count = poisson_dist(lambda)?;
        if !(m > 1.0 && m.is_finite()) {
            return Err(invalid(format!("M must exceed 1, got {m}")));
        }
        let (claims, ctx, mut notes) = match &spec {
            ClaimSpec::Gamma { alpha, beta } => {
                let (alpha, beta) = (*alpha, *beta);
                let c = gamma_compound_constants(alpha, beta, lambda, m).map_err(|e| invalid(e.to_string()))?;
                let mu = lambda * alpha * beta;
                let sigma2 = lambda * alpha * (alpha + 1.0) * beta * beta;
                let ctx = InfDivCtx::new(mu, sigma2, c.nu, c.c_x, c.gamma).map_err(|e| invalid(e.to_string()))?;
                let biased = Gamma::new(alpha + 1.0, beta).map_err(|e| invalid(e.to_string()))?;
                let note = format!("sigma2 is the exact variance; the closed-form constant is {}", c.sigma2);
                (Claims::Gamma { alpha, beta, biased }, ctx, vec![note])
            }
            ClaimSpec::Pmf(pmf) => {
                if pmf.min_atom() < 0.0 {
                    return Err(invalid("claim sizes must be nonnegative"));
                }
                let sb = pmf.size_bias().map_err(|e| invalid(e.to_string()))?;
                let mean = pmf.mean();
                let second = pmf.raw_moment(2);
                let gamma = 1.0 / (m * pmf.max_atom());
                let c_x: f64 = sb.iter().map(|(z, p)| p * z * (gamma * z).exp()).sum();
                let ctx = InfDivCtx::new(lambda * mean, lambda * second, sb.mean(), c_x, gamma)
                    .map_err(|e| invalid(e.to_string()))?;
                let wi = |p: &FinitePmf| WeightedIndex::new(p.probs()).map_err(|e| invalid(e.to_string()));
                let claims = Claims::Pmf {
                    atoms: pmf.atoms().to_vec(),
                    base: wi(pmf)?,
                    biased_atoms: sb.atoms().to_vec(),
                    biased: wi(&sb)?,
                };
                (claims, ctx, Vec::new())
            }
        };
        notes.push(format!("gamma = {}", ctx.gamma));
        Ok(Self {
            lambda,
            spec,
            m,
            count,
            claims,
            info: ProcessInfo {
                process: "cpoisson".into(),
                mu: ctx.mu,
                sigma2: ctx.sigma2,
                c: None,
                monotone: true,
                supports_left_tail: true,
                coupling_exact: true,
                bound: Some(TailBound::Infdiv { ctx }),
                notes,
            },
        })
    }

    fn draw_sum(&self, rng: &mut RngStream) -> f64 {
        let n = self.count.sample(rng) as u64;
        if n == 0 {
            return 0.0;
        }
        match &self.claims {
            // a sum of n Gamma(alpha, beta) claims is Gamma(n alpha, beta)
            Claims::Gamma { alpha, beta, .. } => {
                Gamma::new(n as f64 * alpha, *beta).expect("positive shape").sample(rng)
            }
            Claims::Pmf { atoms, base, .. } => (0..n).map(|_| atoms[base.sample(rng)]).sum(),
        }
    }

    fn draw_biased_claim(&self, rng: &mut RngStream) -> f64 {
        match &self.claims {
            Claims::Gamma { biased, .. } => biased.sample(rng),
            Claims::Pmf {
                biased_atoms, biased, ..
            } => biased_atoms[biased.sample(rng)],
        }
    }
}

impl CoupledSampler for CompoundPoisson {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        let y = self.draw_sum(rng);
        CoupledPair::new(y, y + self.draw_biased_claim(rng))
    }
}

impl Process for CompoundPoisson {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::CompoundPoisson {
            lambda: self.lambda,
            claims: self.spec.clone(),
            m: self.m,
        }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        self.draw_sum(rng)
    }

    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        Some(self)
    }
}

/// `Y ~ Poisson(lambda)` with `Y^s = Y + 1`.
#[derive(Debug, Clone)]
pub struct PoissonProcess {
    lambda: f64,
    dist: Poisson<f64>,
    info: ProcessInfo,
}

impl PoissonProcess {
    pub fn new(lambda: f64) -> Result<Self> {
        let dist = poisson_dist(lambda)?;
        Ok(Self {
            lambda,
            dist,
            info: ProcessInfo {
                process: "poisson".into(),
                mu: lambda,
                sigma2: lambda,
                c: Some(1.0),
                monotone: true,
                supports_left_tail: true,
                coupling_exact: true,
                bound: Some(TailBound::Poisson { lambda }),
                notes: Vec::new(),
            },
        })
    }
}

impl CoupledSampler for PoissonProcess {
    fn sample_coupled(&self, rng: &mut RngStream) -> CoupledPair {
        let y = self.dist.sample(rng);
        CoupledPair::new(y, y + 1.0)
    }
}

impl Process for PoissonProcess {
    fn config(&self) -> ProcessConfig {
        ProcessConfig::Poisson { lambda: self.lambda }
    }

    fn info(&self) -> &ProcessInfo {
        &self.info
    }

    fn sample_y(&self, rng: &mut RngStream) -> f64 {
        self.dist.sample(rng)
    }

    fn coupling(&self) -> Option<&dyn CoupledSampler> {
        Some(self)
    }
}
