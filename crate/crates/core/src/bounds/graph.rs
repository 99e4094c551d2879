use serde::{Deserialize, Serialize};

use super::{check_t, clamp1};
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, bisect_last_true, golden_section_min};
use crate::scalar::{one_minus_pow, Real};

const H_TOL: f64 = 1e-10;
const MIN_REL_TOL: f64 = 1e-8;

/// Constants for the isolated-vertex bounds of an Erdős–Rényi graph `G(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphBoundCtx<T = f64> {
    pub n: u64,
    pub p: T,
    /// `(1 - p)^(-n)`
    pub beta: T,
    pub mu: T,
    pub sigma2: T,
}

/// `ln(gamma_s - beta - 1) = ln 2 + 2s + n ln(1 + p e^s / (1 - p))`
fn ln_gamma_growth<T: Real>(s: T, n: u64, p: T) -> T {
    T::LN_2() + T::lit(2.0) * s + T::lit(n as f64) * (p * s.exp() / (T::one() - p)).ln_1p()
}

/// `gamma_s = 2 e^{2s} (1 + p e^s / (1 - p))^n + beta + 1` with `beta = (1 - p)^(-n)`.
pub fn graph_gamma_s<T: Real>(s: T, n: u64, p: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(Error::InvalidArgument(format!("s must be nonnegative, got {s}")));
    }
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    let lg = ln_gamma_growth(s, n, p);
    let lb = -T::lit(n as f64) * (-p).ln_1p();
    let v = lg.exp() + lb.exp() + T::one();
    if !v.is_finite() {
        return Err(Error::Overflow(format!("gamma_s overflows at s = {s}, n = {n}")));
    }
    Ok(v)
}

impl<T: Real> GraphBoundCtx<T> {
    pub fn new(n: u64, p: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("graph needs n >= 2, got {n}")));
        }
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
        }
        let nn = n as i64;
        let beta = T::one() / one_minus_pow(p, nn);
        if !beta.is_finite() {
            return Err(Error::Overflow(format!("(1 - p)^(-n) overflows for n = {n}, p = {p}")));
        }
        let q1 = one_minus_pow(p, nn - 1);
        let q2 = one_minus_pow(p, nn - 2);
        let nf = T::lit(n as f64);
        let mu = nf * q1;
        let sigma2 = mu * (T::one() + nf * p * q2 - q2);
        if !(mu > T::zero() && sigma2 > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "degenerate graph moments (mu = {mu}, sigma2 = {sigma2})"
            )));
        }
        Ok(Self { n, p, beta, mu, sigma2 })
    }

    pub fn gamma_s(&self, s: T) -> Result<T> {
        graph_gamma_s(s, self.n, self.p)
    }

    /// Largest `theta` with `n ln(1 + p e^theta / (1 - p)) + 2 theta` below the
    /// exponent cap of the scalar type.
    pub fn theta_max(&self) -> T {
        let cap = T::lit(T::EXP_CAP);
        let ok = |th: T| ln_gamma_growth(th, self.n, self.p) - T::LN_2() < cap;
        let mut hi = T::one();
        while ok(hi) {
            hi = hi * T::lit(2.0);
        }
        bisect_last_true(ok, T::zero(), hi)
    }

    /// `H(theta) = mu / (2 sigma^2) * int_0^theta s gamma_s ds`
    pub fn h(&self, theta: T) -> Result<T> {
        if !(theta >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "theta must be nonnegative, got {theta}"
            )));
        }
        if theta == T::zero() {
            return Ok(T::zero());
        }
        // overflow is reported by gamma_s; quadrature only sees finite values
        self.gamma_s(theta)?;
        let integral = adaptive_simpson(
            |s| s * self.gamma_s(s).unwrap_or(T::infinity()),
            T::zero(),
            theta,
            T::lit(H_TOL),
        )?;
        Ok(self.mu / (T::lit(2.0) * self.sigma2) * integral)
    }

    fn objective(&self, theta: T, t: T) -> T {
        match self.h(theta) {
            Ok(h) => -theta * t + h,
            Err(_) => T::infinity(),
        }
    }

    /// `inf_{theta >= 0} exp(-theta t + H(theta))`, minimized over `[0, theta_max]`.
    pub fn right_tail(&self, t: T) -> T {
        if !(t > T::zero()) {
            return T::one();
        }
        let (_, v) = self.minimize(t);
        clamp1(v.exp())
    }

    /// Minimizer and minimum of `-theta t + H(theta)`.
    pub fn minimize(&self, t: T) -> (T, T) {
        let cap = self.theta_max();
        let two = T::lit(2.0);
        // the objective is convex with slope -t at zero: double until it turns up
        let mut lo = T::zero();
        let mut mid = (T::lit(1e-3)).min(cap);
        let mut f_mid = self.objective(mid, t);
        let hi = loop {
            let next = (mid * two).min(cap);
            if next <= mid {
                break cap;
            }
            let f_next = self.objective(next, t);
            if f_next >= f_mid {
                break next;
            }
            lo = mid;
            mid = next;
            f_mid = f_next;
        };
        let (x, fx) = golden_section_min(|th| self.objective(th, t), lo, hi, T::lit(MIN_REL_TOL));
        if fx < T::zero() {
            (x, fx)
        } else {
            (T::zero(), T::zero())
        }
    }

    /// The closed-form relaxation that restricts `theta` to `[0, theta0]`.
    pub fn right_tail_capped(&self, t: T, theta0: T) -> Result<T> {
        check_t(t)?;
        if !(theta0 > T::zero()) {
            return Err(Error::InvalidArgument(format!("theta0 must be positive, got {theta0}")));
        }
        let g = self.gamma_s(theta0)?;
        let two = T::lit(2.0);
        let t_star = theta0 * self.mu * g / (two * self.sigma2);
        let v = if t <= t_star {
            (-t * t * self.sigma2 / (self.mu * g)).exp()
        } else {
            (-theta0 * t + self.mu * g * theta0 * theta0 / (T::lit(4.0) * self.sigma2)).exp()
        };
        Ok(clamp1(v))
    }

    /// Breakpoint of [`Self::right_tail_capped`].
    pub fn capped_breakpoint(&self, theta0: T) -> Result<T> {
        Ok(theta0 * self.mu * self.gamma_s(theta0)? / (T::lit(2.0) * self.sigma2))
    }

    /// `exp(-t^2 sigma^2 / (2 mu (beta + 1)))`
    pub fn left_tail(&self, t: T) -> Result<T> {
        check_t(t)?;
        let v = (-t * t * self.sigma2 / (T::lit(2.0) * self.mu * (self.beta + T::one()))).exp();
        Ok(clamp1(v))
    }
}

pub fn graph_h<T: Real>(theta: T, ctx: &GraphBoundCtx<T>) -> Result<T> {
    ctx.h(theta)
}

pub fn graph_right_tail<T: Real>(ctx: &GraphBoundCtx<T>, t: T) -> Result<T> {
    check_t(t)?;
    Ok(ctx.right_tail(t))
}

pub fn graph_right_tail_capped<T: Real>(ctx: &GraphBoundCtx<T>, t: T, theta0: T) -> Result<T> {
    ctx.right_tail_capped(t, theta0)
}

pub fn graph_left_tail<T: Real>(ctx: &GraphBoundCtx<T>, t: T) -> Result<T> {
    ctx.left_tail(t)
}
