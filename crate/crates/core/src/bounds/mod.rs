//! Analytic tail bounds and the closed-form constants that feed them.
//!
//! Every bound is an upper bound on `P((Y - mu) / sigma >= t)` (right) or
//! `P((Y - mu) / sigma <= -t)` (left) and is clamped to at most one.

mod coverage;
mod curve;
mod graph;
mod infdiv;
mod urn;

pub use coverage::{
    coverage_j, coverage_limits, coverage_moments, coverage_omega, unit_ball_volume, CoverageCtx, CoverageLimits,
    CoverageMoments,
};
pub use curve::{BoundCurve, BoundPoint};
pub use graph::{graph_gamma_s, graph_h, graph_left_tail, graph_right_tail, graph_right_tail_capped, GraphBoundCtx};
pub use infdiv::{gamma_compound_constants, infdiv_bounds, InfDivCtx};
pub use urn::{urn_limit, urn_nonuniform_constants, UrnNonuniform};

use serde::{Deserialize, Serialize};

use crate::distcore::Side;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which result a set of bound parameters comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFamily {
    ThmMain,
    Graph,
    Infdiv,
    Poisson,
    Coverage,
    UrnNonuniform,
}

impl BoundFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundFamily::ThmMain => "thm-main",
            BoundFamily::Graph => "graph",
            BoundFamily::Infdiv => "infdiv",
            BoundFamily::Poisson => "poisson",
            BoundFamily::Coverage => "coverage",
            BoundFamily::UrnNonuniform => "urn-nonuniform",
        }
    }
}

impl std::fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inputs of the bounded-coupling bounds: mean, variance, the almost sure
/// bound `C` on `|Y^s - Y|` and whether the coupling is monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams<T = f64> {
    pub mu: T,
    pub sigma2: T,
    #[serde(rename = "C")]
    pub c: T,
    pub monotone: bool,
    pub family: BoundFamily,
}

impl<T: Real> BoundParams<T> {
    pub fn new(mu: T, sigma2: T, c: T, monotone: bool, family: BoundFamily) -> Result<Self> {
        for (name, v) in [("mu", mu), ("sigma2", sigma2), ("C", c)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            mu,
            sigma2,
            c,
            monotone,
            family,
        })
    }

    /// `A = C mu / sigma^2`
    pub fn a(&self) -> T {
        self.c * self.mu / self.sigma2
    }

    /// `B = C / (2 sigma)`
    pub fn b(&self) -> T {
        self.c / (T::lit(2.0) * self.sigma2.sqrt())
    }

    pub fn sigma(&self) -> T {
        self.sigma2.sqrt()
    }
}

pub(crate) fn check_t<T: Real>(t: T) -> Result<()> {
    if t >= T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")))
    }
}

#[inline]
pub(crate) fn clamp1<T: Real>(x: T) -> T {
    x.min(T::one())
}

/// Left tail for a monotone bounded coupling: `exp(-t^2 / (2A))`.
pub fn bound_left_monotone<T: Real>(bp: &BoundParams<T>, t: T) -> Result<T> {
    check_t(t)?;
    if !bp.monotone {
        return Err(Error::NotMonotone);
    }
    Ok(clamp1((-t * t / (T::lit(2.0) * bp.a())).exp()))
}

/// Right tail for a bounded coupling: `exp(-t^2 / (2(A + Bt)))`.
pub fn bound_right<T: Real>(bp: &BoundParams<T>, t: T) -> Result<T> {
    check_t(t)?;
    Ok(clamp1((-t * t / (T::lit(2.0) * (bp.a() + bp.b() * t))).exp()))
}

/// Poisson tails `(exp(-t^2/2), exp(-t^2 / (2 + t / sqrt(lambda))))`.
pub fn poisson_bounds<T: Real>(lambda: T, t: T) -> Result<(T, T)> {
    check_t(t)?;
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let two = T::lit(2.0);
    let left = (-t * t / two).exp();
    let right = (-t * t / (two + t / lambda.sqrt())).exp();
    Ok((clamp1(left), clamp1(right)))
}

/// A tail bound attached to a process, dispatching to the right family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailBound {
    /// Bounded coupling; `shift` is subtracted from `t` before evaluation,
    /// which transfers a bound from a nearby variable with `|V - Y| <= shift * sigma`.
    Main {
        params: BoundParams<f64>,
        shift: f64,
    },
    Graph {
        ctx: GraphBoundCtx<f64>,
    },
    Infdiv {
        ctx: InfDivCtx<f64>,
    },
    Poisson {
        lambda: f64,
    },
}

impl TailBound {
    pub fn main(params: BoundParams<f64>) -> Self {
        TailBound::Main { params, shift: 0.0 }
    }

    pub fn family(&self) -> BoundFamily {
        match self {
            TailBound::Main { params, .. } => params.family,
            TailBound::Graph { .. } => BoundFamily::Graph,
            TailBound::Infdiv { .. } => BoundFamily::Infdiv,
            TailBound::Poisson { .. } => BoundFamily::Poisson,
        }
    }

    /// Whether a left-tail bound is licensed.
    pub fn has_left(&self) -> bool {
        match self {
            TailBound::Main { params, .. } => params.monotone,
            _ => true,
        }
    }

    pub fn right(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        match self {
            TailBound::Main { params, shift } => bound_right(params, (t - shift).max(0.0)),
            TailBound::Graph { ctx } => Ok(ctx.right_tail(t)),
            TailBound::Infdiv { ctx } => Ok(ctx.bounds(t)?.1),
            TailBound::Poisson { lambda } => Ok(poisson_bounds(*lambda, t)?.1),
        }
    }

    /// `None` when the left tail is not licensed.
    pub fn left(&self, t: f64) -> Result<Option<f64>> {
        check_t(t)?;
        match self {
            TailBound::Main { params, shift } => {
                if params.monotone {
                    bound_left_monotone(params, (t - shift).max(0.0)).map(Some)
                } else {
                    Ok(None)
                }
            }
            TailBound::Graph { ctx } => ctx.left_tail(t).map(Some),
            TailBound::Infdiv { ctx } => Ok(Some(ctx.bounds(t)?.0)),
            TailBound::Poisson { lambda } => Ok(Some(poisson_bounds(*lambda, t)?.0)),
        }
    }

    pub fn side(&self, side: Side, t: f64) -> Result<Option<f64>> {
        match side {
            Side::Left => self.left(t),
            Side::Right => self.right(t).map(Some),
        }
    }

    pub fn curve(&self, grid: &[f64]) -> Result<BoundCurve> {
        let points = grid
            .iter()
            .map(|&t| {
                Ok(BoundPoint {
                    t,
                    left: self.left(t)?,
                    right: self.right(t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundCurve {
            family: self.family(),
            points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bp(mu: f64, s2: f64, c: f64) -> BoundParams {
        BoundParams::new(mu, s2, c, true, BoundFamily::ThmMain).unwrap()
    }

    #[test]
    fn main_bound_examples() {
        let p = bp(4.0, 2.0, 2.0);
        assert_relative_eq!(p.a(), 4.0);
        assert_relative_eq!(
            bound_left_monotone(&p, 1.0).unwrap(),
            (-0.125f64).exp(),
            epsilon = 1e-15
        );
        assert!((bound_left_monotone(&p, 1.0).unwrap() - 0.882497).abs() < 1e-6);
        let r = bound_right(&p, 1.0).unwrap();
        assert!((r - 0.89922).abs() < 1e-5);
        assert_relative_eq!(r, (-1.0 / (2.0 * (4.0 + 0.5f64.sqrt()))).exp(), epsilon = 1e-15);
        assert_eq!(bound_left_monotone(&p, 0.0).unwrap(), 1.0);
        assert_eq!(bound_right(&p, 0.0).unwrap(), 1.0);
        assert!(bound_right(&p, -1.0).is_err());
        assert!(bound_left_monotone(&p, -0.1).is_err());
    }

    #[test]
    fn left_requires_monotone() {
        let p = BoundParams::new(4.0, 2.0, 2.0, false, BoundFamily::ThmMain).unwrap();
        assert_eq!(bound_left_monotone(&p, 1.0), Err(Error::NotMonotone));
        assert_eq!(TailBound::main(p).left(1.0).unwrap(), None);
        assert!(BoundParams::new(1.0, 0.0, 1.0, true, BoundFamily::ThmMain).is_err());
    }

    #[test]
    fn poisson_matches_main_with_unit_coupling() {
        for lambda in [0.5, 4.0, 100.0] {
            let p = bp(lambda, lambda, 1.0);
            for t in [0.0, 0.3, 1.0, 2.5, 6.0] {
                let (l, r) = poisson_bounds(lambda, t).unwrap();
                assert_relative_eq!(l, (-t * t / 2.0).exp(), epsilon = 1e-15);
                assert_relative_eq!(l, bound_left_monotone(&p, t).unwrap(), epsilon = 1e-15);
                assert_relative_eq!(r, bound_right(&p, t).unwrap(), epsilon = 1e-14);
            }
        }
        assert!((poisson_bounds(3.0f64, 1.0).unwrap().0 - 0.606531).abs() < 1e-6);
        assert_eq!(poisson_bounds(3.0, 0.0).unwrap(), (1.0, 1.0));
        let (_, r) = poisson_bounds(1e16, 2.0).unwrap();
        assert_relative_eq!(r, (-2.0f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn f32_instantiation() {
        let p: BoundParams<f32> = BoundParams::new(4.0, 2.0, 2.0, true, BoundFamily::ThmMain).unwrap();
        assert!((bound_left_monotone(&p, 1.0).unwrap() - 0.882497).abs() < 1e-6);
        assert!((bound_right(&p, 1.0).unwrap() - 0.89922).abs() < 1e-5);
    }

    #[test]
    fn shifted_bound_is_weaker() {
        let p = bp(25.0, 12.5, 2.0);
        let plain = TailBound::main(p);
        let shifted = TailBound::Main {
            params: p,
            shift: 2.0 / p.sigma(),
        };
        for t in [0.0, 0.5, 1.0, 3.0] {
            assert!(shifted.right(t).unwrap() >= plain.right(t).unwrap());
            assert!(shifted.left(t).unwrap().unwrap() >= plain.left(t).unwrap().unwrap());
        }
        assert_eq!(shifted.right(0.5).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn bounds_in_unit_interval_and_nonincreasing(
            mu in 0.01f64..1e4, s2 in 0.01f64..1e4, c in 0.1f64..20.0,
            t1 in 0.0f64..20.0, dt in 0.0f64..5.0,
        ) {
            let p = bp(mu, s2, c);
            let t2 = t1 + dt;
            let (l1, l2) = (bound_left_monotone(&p, t1).unwrap(), bound_left_monotone(&p, t2).unwrap());
            let (r1, r2) = (bound_right(&p, t1).unwrap(), bound_right(&p, t2).unwrap());
            for v in [l1, l2, r1, r2] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(l2 <= l1 && r2 <= r1);
            prop_assert!(r1 >= l1);
        }
    }
}
