//! Small numerical kernels: adaptive Simpson quadrature, golden-section
//! minimization, bisection and compensated summation.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol` (floored at a few ulps of the running estimate).
///
/// Fails when some panel reaches the depth limit without meeting its share of
/// the tolerance, or when the integrand is not finite.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let two = T::lit(2.0);
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / two;
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut failed = false;
    let v = simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut failed);
    if !v.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")));
    }
    if failed {
        return Err(Error::Quadrature(format!(
            "tolerance {tol} not met on [{a}, {b}] within depth {MAX_DEPTH}"
        )));
    }
    Ok(v)
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    failed: &mut bool,
) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let tol = tol.max(T::tol_floor(left + right));
    if delta.abs() <= T::lit(15.0) * tol || !delta.is_finite() {
        return left + right + delta / T::lit(15.0);
    }
    if depth == 0 || m <= a || m >= b {
        *failed = true;
        return left + right + delta / T::lit(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / two, depth - 1, failed)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / two, depth - 1, failed)
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
/// Stops when the bracket is narrower than `rel_tol * max(1, |x|)`.
/// Returns `(argmin, min)`; the endpoints are always compared as well.
pub fn golden_section_min<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, rel_tol: T) -> (T, T) {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if (b - a).abs() <= rel_tol * T::one().max(c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Largest `x` in `[lo, hi]` with `pred(x)` true, for a predicate that is
/// true on an initial segment. Assumes `pred(lo)`.
pub fn bisect_last_true<T: Real, P: Fn(T) -> bool>(pred: P, lo: T, hi: T) -> T {
    if pred(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = (a + b) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `ln C(n, k)` via a running sum of logarithms.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Exact `C(n, k)` as an integer; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Binomial(n, q) probability mass function, computed in log space.
pub fn binomial_pmf(n: u64, q: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let lp = ln_binomial(n, k) + xlogy(k as f64, q) + xlogy((n - k) as f64, 1.0 - q);
            lp.exp()
        })
        .collect()
}

/// `x * ln(y)` with `0 * ln(0) = 0`.
#[inline]
pub fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `n!` as `u128`; `None` on overflow.
pub fn factorial(n: u64) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_polynomial_and_exponential() {
        let v = adaptive_simpson(|x: f64| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 4.0, epsilon = 1e-12);
        let v = adaptive_simpson(|x: f64| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(v, std::f64::consts::E - 1.0, epsilon = 1e-11);
        let v = adaptive_simpson(|x: f64| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(v, 1.0 - std::f64::consts::E, epsilon = 1e-11);
    }

    #[test]
    fn simpson_in_f32() {
        let v = adaptive_simpson(|x: f32| x.sin(), 0.0, std::f32::consts::PI, 1e-5).unwrap();
        assert!((v - 2.0).abs() < 1e-4);
    }

    #[test]
    fn simpson_reports_nonfinite() {
        assert!(adaptive_simpson(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section_min(|x: f64| (x - 1.3).powi(2) + 0.5, 0.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-8);
        assert!((fx - 0.5).abs() < 1e-14);
        let (x, _) = golden_section_min(|x: f64| x, 0.0, 5.0, 1e-10);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn bisect_threshold() {
        let x = bisect_last_true(|x: f64| x * x < 2.0, 0.0, 10.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(6, 3), Some(20));
        assert_eq!(factorial(8), Some(40320));
        assert!((ln_binomial(50, 25) - (binomial(50, 25).unwrap() as f64).ln()).abs() < 1e-10);
        let pmf = binomial_pmf(5, 0.3);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(binomial_pmf(3, 0.0)[0], 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: KahanSum = [1.0, 1e-16, 1e-16, -1.0].into_iter().collect();
        assert!((s.value() - 2e-16).abs() < 1e-30);
    }
}
