use serde::{Deserialize, Serialize};

use super::{BoundFamily, BoundParams};
use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::scalar::{one_minus_pow, Real};

const OMEGA_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-9;
const J_TOL: f64 = 1e-10;

/// Volume of the unit ball in `R^d`, from `pi_d = 2 pi / d * pi_{d-2}`.
pub fn unit_ball_volume<T: Real>(d: u32) -> T {
    let mut v = if d.is_multiple_of(2) { T::one() } else { T::lit(2.0) };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v = v * T::lit(2.0) * T::PI() / T::lit(k as f64);
        k += 2;
    }
    v
}

/// Volume of the union of two unit balls whose centers are `r` apart.
pub fn coverage_omega<T: Real>(d: u32, r: T) -> Result<T> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(r >= T::zero() && r <= T::lit(2.0)) {
        return Err(Error::InvalidArgument(format!("r must lie in [0, 2], got {r}")));
    }
    if d == 1 {
        return Ok(T::lit(2.0) + r);
    }
    // t = 2 sin(u) turns (1 - t^2/4)^((d-1)/2) dt into 2 cos^d(u) du
    let upper = (r / T::lit(2.0)).min(T::one()).asin();
    let di = d as i32;
    let lens = adaptive_simpson(
        |u: T| T::lit(2.0) * u.cos().powi(di),
        T::zero(),
        upper,
        T::lit(OMEGA_TOL),
    )?;
    Ok(unit_ball_volume::<T>(d) + unit_ball_volume::<T>(d - 1) * lens)
}

/// Boolean model of `n` balls of radius `rho` on the `d`-dimensional torus of volume `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageCtx<T = f64> {
    pub n: u64,
    pub rho: T,
    pub d: u32,
    /// `pi_d rho^d`
    pub phi: T,
    /// Kissing-type packing constant; fixed to 2 on the line.
    pub kappa_d: u32,
}

/// Means and variances of the covered volume `V` and the isolated count `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageMoments<T = f64> {
    pub mu_v: T,
    pub sigma2_v: T,
    pub mu_s: T,
    pub sigma2_s: T,
}

/// Large-`n` limits of `mu_V / n`, `sigma_V^2 / n` and `sigma_S^2 / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageLimits<T = f64> {
    pub vol_frac: T,
    pub g_v: T,
    pub g_s: T,
}

impl<T: Real> CoverageCtx<T> {
    pub fn new(n: u64, rho: T, d: u32, kappa_d: Option<u32>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if n < 4 {
            return Err(Error::InvalidArgument(format!("coverage needs n >= 4, got {n}")));
        }
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        let kappa_d = match (d, kappa_d) {
            (1, None | Some(2)) => 2,
            (1, Some(k)) => return Err(Error::InvalidArgument(format!("kappa_1 is 2, got {k}"))),
            (_, Some(k)) => k,
            (_, None) => return Err(Error::InvalidArgument(format!("kappa_d must be supplied for d = {d}"))),
        };
        let phi = unit_ball_volume::<T>(d) * rho.powi(d as i32);
        if !(phi < T::lit(n as f64)) {
            return Err(Error::InvalidArgument(format!(
                "ball volume {phi} does not fit in volume {n}"
            )));
        }
        Ok(Self {
            n,
            rho,
            d,
            phi,
            kappa_d,
        })
    }

    /// Side length of the torus, `n^(1/d)`.
    pub fn side(&self) -> T {
        T::lit(self.n as f64).powf(T::one() / T::lit(self.d as f64))
    }

    /// The variance formulas integrate over `B(0, 2 rho)`, which must not wrap
    /// around the torus.
    pub fn check_no_wrap(&self) -> Result<()> {
        if T::lit(4.0) * self.rho > self.side() {
            return Err(Error::InvalidArgument(format!(
                "4 rho = {} exceeds the torus side {}",
                T::lit(4.0) * self.rho,
                self.side()
            )));
        }
        Ok(())
    }

    /// Union volume of two radius-`rho` balls at distance `r <= 2 rho`.
    fn pair_volume(&self, r: T) -> T {
        let x = (r / self.rho).min(T::lit(2.0));
        self.rho.powi(self.d as i32) * coverage_omega(self.d, x).unwrap_or(T::nan())
    }

    fn radial(&self, h: impl Fn(T) -> T, lo: T, hi: T) -> Result<T> {
        let d = self.d;
        let surface = T::lit(d as f64) * unit_ball_volume::<T>(d);
        let v = adaptive_simpson(|r: T| h(r) * r.powi(d as i32 - 1), lo, hi, T::lit(MOMENT_TOL))?;
        Ok(surface * v)
    }

    pub fn moments(&self) -> Result<CoverageMoments<T>> {
        self.check_no_wrap()?;
        let one = T::one();
        let nf = T::lit(self.n as f64);
        let ni = self.n as i64;
        let x = self.phi / nf;
        let two_d = T::lit(2.0).powi(self.d as i32);
        let q_n = one_minus_pow(x, ni);
        let q_n1 = one_minus_pow(x, ni - 1);
        let q_2n = one_minus_pow(x, 2 * ni);
        let q_2n2 = one_minus_pow(x, 2 * ni - 2);
        let mu_v = nf * (one - q_n);
        let mu_s = nf * q_n1;

        let two_rho = T::lit(2.0) * self.rho;
        let pair = |r: T, k: i64| one_minus_pow(self.pair_volume(r) / nf, k);
        // the n^2 q^{2n} term is spread over both regions to limit cancellation
        let near_v = self.radial(|r| pair(r, ni) - q_2n, T::zero(), two_rho)?;
        let far_v = (nf - two_d * self.phi) * (one_minus_pow(T::lit(2.0) * x, ni) - q_2n);
        let sigma2_v = nf * (near_v + far_v);

        let near_s = self.radial(|r| pair(r, ni - 2), self.rho, two_rho)?;
        let cross = (one - two_d * x) * one_minus_pow(T::lit(2.0) * x, ni - 2) - q_2n2;
        let sigma2_s = nf * q_n1 * (one - q_n1) + (nf - one) * near_s + nf * (nf - one) * cross;

        for (name, v) in [("sigma2_v", sigma2_v), ("sigma2_s", sigma2_s)] {
            if !v.is_finite() {
                return Err(Error::Quadrature(format!("{name} is not finite")));
            }
        }
        Ok(CoverageMoments {
            mu_v,
            sigma2_v,
            mu_s,
            sigma2_s,
        })
    }

    /// Parameters for the covered volume, with coupling bound `phi`.
    pub fn volume_bound_params(&self, m: &CoverageMoments<T>, monotone: bool) -> Result<BoundParams<T>> {
        BoundParams::new(m.mu_v, m.sigma2_v, self.phi, monotone, BoundFamily::Coverage)
    }

    /// Parameters for the non-isolated count `n - S`, with coupling bound `kappa_d + 1`.
    pub fn nonisolated_bound_params(&self, m: &CoverageMoments<T>, monotone: bool) -> Result<BoundParams<T>> {
        BoundParams::new(
            T::lit(self.n as f64) - m.mu_s,
            m.sigma2_s,
            T::lit(self.kappa_d as f64 + 1.0),
            monotone,
            BoundFamily::Coverage,
        )
    }
}

pub fn coverage_moments<T: Real>(ctx: &CoverageCtx<T>) -> Result<CoverageMoments<T>> {
    ctx.moments()
}

/// `J_{r,d}(rho) = d pi_d int_0^r exp(-rho^d omega_d(t)) t^{d-1} dt`
pub fn coverage_j<T: Real>(r: T, d: u32, rho: T) -> Result<T> {
    if !(r >= T::zero() && r <= T::lit(2.0)) {
        return Err(Error::InvalidArgument(format!("r must lie in [0, 2], got {r}")));
    }
    let rd = rho.powi(d as i32);
    let v = adaptive_simpson(
        |t: T| (-rd * coverage_omega(d, t).unwrap_or(T::nan())).exp() * t.powi(d as i32 - 1),
        T::zero(),
        r,
        T::lit(J_TOL),
    )?;
    Ok(T::lit(d as f64) * unit_ball_volume::<T>(d) * v)
}

pub fn coverage_limits<T: Real>(rho: T, d: u32) -> Result<CoverageLimits<T>> {
    if !(rho > T::zero()) || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "need rho > 0 and d >= 1, got rho = {rho}, d = {d}"
        )));
    }
    let one = T::one();
    let phi = unit_ball_volume::<T>(d) * rho.powi(d as i32);
    let rd = rho.powi(d as i32);
    let two_d = T::lit(2.0).powi(d as i32);
    let j2 = coverage_j(T::lit(2.0), d, rho)?;
    let j1 = coverage_j(one, d, rho)?;
    let e2 = (-T::lit(2.0) * phi).exp();
    let g_v = rd * j2 - (two_d * phi + phi * phi) * e2;
    let g_s = (-phi).exp() - (one + (two_d - T::lit(2.0)) * phi + phi * phi) * e2 + rd * (j2 - j1);
    Ok(CoverageLimits {
        vol_frac: one - (-phi).exp(),
        g_v,
        g_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume::<f64>(0), 1.0);
        assert_eq!(unit_ball_volume::<f64>(1), 2.0);
        assert_relative_eq!(unit_ball_volume::<f64>(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(4), PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(5), 8.0 * PI * PI / 15.0, max_relative = 1e-15);
    }

    #[test]
    fn omega_examples() {
        assert_eq!(coverage_omega(1, 1.0).unwrap(), 3.0);
        for d in 1..=5 {
            let pd = unit_ball_volume::<f64>(d);
            assert_relative_eq!(coverage_omega(d, 0.0).unwrap(), pd, epsilon = 1e-15);
            assert!((coverage_omega(d, 2.0).unwrap() - 2.0 * pd).abs() < 1e-9);
        }
        assert!((coverage_omega(2, 2.0).unwrap() - 2.0 * PI).abs() < 1e-9);
        assert!(coverage_omega(2, 2.5).is_err());
        assert!(coverage_omega(2, -0.1).is_err());
    }

    #[test]
    fn omega_matches_lens_formula_in_plane() {
        // two unit disks at distance r overlap in 2 acos(r/2) - (r/2) sqrt(4 - r^2)
        for i in 0..=20 {
            let r = i as f64 * 0.1;
            let lens = 2.0 * (r / 2.0).acos() - r / 2.0 * (4.0 - r * r).sqrt();
            assert!((coverage_omega(2, r).unwrap() - (2.0 * PI - lens)).abs() < 1e-10);
        }
    }

    #[test]
    fn omega_nondecreasing() {
        for d in 1..=4 {
            let mut prev = 0.0;
            for i in 0..=40 {
                let w = coverage_omega(d, i as f64 * 0.05).unwrap();
                assert!(w >= prev);
                prev = w;
            }
        }
    }

    #[test]
    fn moments_on_the_line() {
        let ctx = CoverageCtx::new(4, 0.5, 1, None).unwrap();
        let m = ctx.moments().unwrap();
        assert_relative_eq!(m.mu_v, 2.734375, epsilon = 1e-12);
        assert_relative_eq!(m.mu_s, 1.6875, epsilon = 1e-12);
        assert!(m.sigma2_v > 0.0 && m.sigma2_s > 0.0);
    }

    #[test]
    fn variances_positive() {
        for (n, rho, d, k) in [
            (32, 0.5, 1, None),
            (16, 1.0, 1, None),
            (50, 0.5, 2, Some(6)),
            (100, 0.4, 3, Some(12)),
        ] {
            let m = CoverageCtx::new(n, rho, d, k).unwrap().moments().unwrap();
            assert!(m.sigma2_v > 0.0 && m.sigma2_s > 0.0, "n {n} rho {rho} d {d}");
        }
    }

    #[test]
    fn variances_approach_limits() {
        for (rho, d) in [(0.5, 1), (1.0, 1), (0.5, 2)] {
            let n = 1_000_000;
            let k = if d == 1 { None } else { Some(6) };
            let m = CoverageCtx::new(n, rho, d, k).unwrap().moments().unwrap();
            let lim = coverage_limits(rho, d).unwrap();
            let nf = n as f64;
            assert!((m.mu_v / nf - lim.vol_frac).abs() < 1e-5);
            assert!(
                (m.sigma2_v / nf - lim.g_v).abs() < 1e-4,
                "{} vs {}",
                m.sigma2_v / nf,
                lim.g_v
            );
            assert!(
                (m.sigma2_s / nf - lim.g_s).abs() < 1e-4,
                "{} vs {}",
                m.sigma2_s / nf,
                lim.g_s
            );
        }
    }

    #[test]
    fn limits_positive() {
        for rho in [0.5, 1.0, 2.0] {
            for d in [1, 2] {
                let l = coverage_limits(rho, d).unwrap();
                assert!(l.g_v > 0.0 && l.g_s > 0.0, "rho {rho} d {d}");
            }
        }
    }

    #[test]
    fn guards() {
        assert!(CoverageCtx::new(3, 0.5, 1, None).is_err());
        assert!(CoverageCtx::<f64>::new(4, 0.5, 2, None).is_err());
        assert!(CoverageCtx::new(4, 0.5, 1, Some(3)).is_err());
        assert!(CoverageCtx::new(4, 3.0, 1, None).is_err());
        let wide = CoverageCtx::new(4, 1.5, 1, None).unwrap();
        assert!(wide.moments().is_err());
    }

    #[test]
    fn f32_instantiation() {
        let m = CoverageCtx::<f32>::new(4, 0.5, 1, None).unwrap().moments().unwrap();
        assert!((m.mu_v - 2.734375).abs() < 1e-5);
        assert!((coverage_omega::<f32>(2, 2.0).unwrap() - 2.0 * std::f32::consts::PI).abs() < 1e-5);
    }
}
