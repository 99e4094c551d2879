//! Size-bias couplings for counting statistics, the concentration bounds they
//! yield, and exact and Monte Carlo checks of those bounds.
//!
//! The distribution and bound layers are generic over the scalar type through
//! [`Real`]; the aliases below fix it to `f64` or `f32`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod distcore;
pub mod error;
pub mod mc;
pub mod numeric;
pub mod oracle;
pub mod processes;
pub mod scalar;
pub mod sizebias;

pub use bounds::{BoundCurve, BoundFamily, BoundParams, TailBound};
pub use distcore::{FinitePmf, RngStream, Side};
pub use error::{Error, Result};
pub use oracle::JointLaw;
pub use processes::{Process, ProcessConfig, ProcessInfo};
pub use scalar::Real;
pub use sizebias::{CoupledPair, CoupledSampler, CouplingAudit};

pub type Pmf = FinitePmf<f64>;
pub type Pmf32 = FinitePmf<f32>;
pub type Bounds = BoundParams<f64>;
pub type Bounds32 = BoundParams<f32>;
