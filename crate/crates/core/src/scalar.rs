//! Scalar abstraction for the analytic parts of the library.
//!
//! Bounds, quadrature and finite laws are written once against [`Real`] and
//! instantiated for `f64` (the default everywhere) and `f32`.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Largest exponent fed to `exp` by the bound optimizers.
    const EXP_CAP: f64;

    /// Converts a finite `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Smallest absolute tolerance worth asking of an integrator whose
    /// result has magnitude `scale`.
    #[inline]
    fn tol_floor(scale: Self) -> Self {
        Self::lit(64.0) * Self::epsilon() * (Self::one() + scale.abs())
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const EXP_CAP: f64 = 700.0;
}

impl Real for f32 {
    const EXP_CAP: f64 = 80.0;
}

/// `base^exp` with the combinatorial convention `0^0 = 1`.
#[inline]
pub fn powi0<T: Real>(base: T, exp: i64) -> T {
    if exp == 0 {
        T::one()
    } else if exp > 0 && exp <= i32::MAX as i64 {
        base.powi(exp as i32)
    } else {
        base.powf(T::lit(exp as f64))
    }
}

/// `(1 - x)^k` evaluated through `ln_1p` when that is more accurate.
#[inline]
pub fn one_minus_pow<T: Real>(x: T, k: i64) -> T {
    if k == 0 {
        return T::one();
    }
    if x >= T::one() {
        return powi0(T::one() - x, k);
    }
    (T::lit(k as f64) * (-x).ln_1p()).exp()
}
