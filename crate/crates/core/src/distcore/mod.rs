//! Finite laws, size-biasing and the shared random stream.

mod pmf;
mod rng;

pub use pmf::{
    canonical_atom, exact_tail, pmf_moments, size_bias_pmf, tv_distance, FinitePmf, Moments, Side, MASS_TOL, TAIL_SLACK,
};
pub use rng::{RngStream, RNG_ALGORITHM};
