use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Absolute tolerance on the total mass of a [`FinitePmf`].
pub const MASS_TOL: f64 = 1e-12;

/// Slack, in standardized units, applied when deciding whether an atom lies
/// in a tail event. Atoms sitting exactly on the threshold count as inside.
pub const TAIL_SLACK: f64 = 1e-9;

/// Which deviation a tail probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `P((Y - mu) / sigma <= -t)`
    Left,
    /// `P((Y - mu) / sigma >= t)`
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    /// Whether the standardized value `z` belongs to the tail event at `t`.
    #[inline]
    pub fn contains(self, z: f64, t: f64) -> bool {
        match self {
            Side::Right => z >= t - TAIL_SLACK,
            Side::Left => z <= -t + TAIL_SLACK,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean and variance of a law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<T = f64> {
    pub mean: T,
    pub variance: T,
}

/// Rounds to 12 significant digits so that atoms produced by different
/// arithmetic paths merge.
pub fn canonical_atom<T: Real>(x: T) -> T {
    if x == T::zero() || !x.is_finite() {
        return x + T::zero();
    }
    let digits = T::lit(12.0);
    let e = x.abs().log10().floor();
    let scale = T::lit(10.0).powf(digits - T::one() - e);
    let r = (x * scale).round() / scale;
    if r.is_finite() {
        r
    } else {
        x
    }
}

/// A probability law on finitely many real atoms.
///
/// Atoms are strictly increasing, every stored probability is positive and
/// the total mass is one to within [`MASS_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePmf<T = f64> {
    atoms: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real> FinitePmf<T> {
    /// Builds a law from parallel arrays. Atoms need not be sorted; equal atoms
    /// (after canonical rounding) are merged and zero masses pruned.
    pub fn new(atoms: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        let pmf = Self::canonicalize(atoms.into_iter().zip(probs))?;
        let total = pmf.probs.iter().fold(T::zero(), |a, &p| a + p);
        let tol = T::lit(MASS_TOL).max(T::tol_floor(T::lit(pmf.len() as f64)));
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidPmf(format!("total mass {total} differs from 1")));
        }
        Ok(pmf)
    }

    /// Builds a law from nonnegative weights, normalizing by their total.
    pub fn from_weights<I: IntoIterator<Item = (T, T)>>(pairs: I) -> Result<Self> {
        let mut pmf = Self::canonicalize(pairs)?;
        let total = pmf.probs.iter().fold(T::zero(), |a, &p| a + p);
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::InvalidPmf("weights must have a positive finite total".into()));
        }
        for p in &mut pmf.probs {
            *p = *p / total;
        }
        Ok(pmf)
    }

    pub fn point_mass(c: T) -> Self {
        Self {
            atoms: vec![canonical_atom(c)],
            probs: vec![T::one()],
        }
    }

    fn canonicalize<I: IntoIterator<Item = (T, T)>>(pairs: I) -> Result<Self> {
        let mut v: Vec<(T, T)> = Vec::new();
        for (x, p) in pairs {
            if !x.is_finite() {
                return Err(Error::InvalidPmf(format!("non-finite atom {x}")));
            }
            if !(p >= T::zero()) || !p.is_finite() {
                return Err(Error::InvalidPmf(format!("invalid probability {p} at atom {x}")));
            }
            if p > T::zero() {
                v.push((canonical_atom(x), p));
            }
        }
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));
        let mut atoms: Vec<T> = Vec::with_capacity(v.len());
        let mut probs: Vec<T> = Vec::with_capacity(v.len());
        for (x, p) in v {
            match atoms.last() {
                Some(&last) if last == x => {
                    let l = probs.len() - 1;
                    probs[l] = probs[l] + p;
                }
                _ => {
                    atoms.push(x);
                    probs.push(p);
                }
            }
        }
        if atoms.is_empty() {
            return Err(Error::InvalidPmf("no atom carries positive mass".into()));
        }
        Ok(Self { atoms, probs })
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }

    /// Mass at `x` (after canonical rounding), zero off the support.
    pub fn prob_of(&self, x: T) -> T {
        let x = canonical_atom(x);
        match self.atoms.binary_search_by(|a| a.partial_cmp(&x).expect("finite")) {
            Ok(i) => self.probs[i],
            Err(_) => T::zero(),
        }
    }

    pub fn min_atom(&self) -> T {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> T {
        self.atoms[self.atoms.len() - 1]
    }

    pub fn mean(&self) -> T {
        self.iter().fold(T::zero(), |a, (x, p)| a + x * p)
    }

    /// `E[X^k]`
    pub fn raw_moment(&self, k: i32) -> T {
        self.iter().fold(T::zero(), |a, (x, p)| a + x.powi(k) * p)
    }

    /// Mean and variance (two-pass, so the variance is never negative).
    pub fn moments(&self) -> Moments<T> {
        let mean = self.mean();
        let variance = self.iter().fold(T::zero(), |a, (x, p)| {
            let d = x - mean;
            a + d * d * p
        });
        Moments { mean, variance }
    }

    /// The size-biased law `x p(x) / mu`. The atom at zero drops out.
    pub fn size_bias(&self) -> Result<Self> {
        if self.min_atom() < T::zero() {
            return Err(Error::SizeBias(format!("negative atom {}", self.min_atom())));
        }
        let mu = self.mean();
        if !(mu > T::zero()) {
            return Err(Error::SizeBias("mean is zero".into()));
        }
        let (atoms, probs) = self
            .iter()
            .filter(|&(x, _)| x > T::zero())
            .map(|(x, p)| (x, x * p / mu))
            .unzip();
        Self::canonicalize_pairs(atoms, probs)
    }

    fn canonicalize_pairs(atoms: Vec<T>, probs: Vec<T>) -> Result<Self> {
        Self::canonicalize(atoms.into_iter().zip(probs))
    }

    /// Total variation distance: half the L1 distance over the union of supports.
    pub fn tv_distance(&self, other: &Self) -> T {
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < self.len() || j < other.len() {
            let take_left = j >= other.len() || (i < self.len() && self.atoms[i] < other.atoms[j]);
            let take_right = i >= self.len() || (j < other.len() && other.atoms[j] < self.atoms[i]);
            if take_left {
                acc = acc + self.probs[i];
                i += 1;
            } else if take_right {
                acc = acc + other.probs[j];
                j += 1;
            } else {
                acc = acc + (self.probs[i] - other.probs[j]).abs();
                i += 1;
                j += 1;
            }
        }
        (acc / T::lit(2.0)).min(T::one())
    }

    /// Exact tail probability of the standardized deviation `(Y - mu) / sigma`.
    pub fn exact_tail(&self, mu: T, sigma: T, t: T, side: Side) -> Result<T> {
        if !(sigma > T::zero()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        let t = t.as_f64();
        Ok(self
            .iter()
            .filter(|&(x, _)| side.contains(((x - mu) / sigma).as_f64(), t))
            .fold(T::zero(), |a, (_, p)| a + p)
            .min(T::one()))
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &Self) -> Self {
        let pairs = self
            .iter()
            .flat_map(|(x, p)| other.iter().map(move |(y, q)| (x + y, p * q)));
        Self::canonicalize(pairs).expect("convolution of valid laws")
    }

    /// Converts between scalar types.
    pub fn cast<U: Real>(&self) -> FinitePmf<U> {
        FinitePmf::from_weights(self.iter().map(|(x, p)| (U::lit(x.as_f64()), U::lit(p.as_f64()))))
            .expect("valid law stays valid")
    }
}

/// `pmf_moments`
pub fn pmf_moments<T: Real>(p: &FinitePmf<T>) -> Moments<T> {
    p.moments()
}

/// `size_bias_pmf`
pub fn size_bias_pmf<T: Real>(p: &FinitePmf<T>) -> Result<FinitePmf<T>> {
    p.size_bias()
}

/// `tv_distance`
pub fn tv_distance<T: Real>(p: &FinitePmf<T>, q: &FinitePmf<T>) -> T {
    p.tv_distance(q)
}

/// `exact_tail`
pub fn exact_tail<T: Real>(p: &FinitePmf<T>, mu: T, sigma: T, t: T, side: Side) -> Result<T> {
    p.exact_tail(mu, sigma, t, side)
}

#[derive(Serialize, Deserialize)]
struct RawPmf<T> {
    atoms: Vec<T>,
    probs: Vec<T>,
}

impl<T: Real + Serialize> Serialize for FinitePmf<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawPmf {
            atoms: self.atoms.clone(),
            probs: self.probs.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + DeserializeOwned> Deserialize<'de> for FinitePmf<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPmf::<T>::deserialize(d)?;
        FinitePmf::new(raw.atoms, raw.probs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pmf(pairs: &[(f64, f64)]) -> FinitePmf {
        FinitePmf::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()).unwrap()
    }

    #[test]
    fn moments_examples() {
        let m = FinitePmf::point_mass(3.5).moments();
        assert_eq!((m.mean, m.variance), (3.5, 0.0));
        let m = pmf(&[(0.0, 0.5), (1.0, 0.5)]).moments();
        assert_eq!((m.mean, m.variance), (0.5, 0.25));
        let m = pmf(&[(0.0, 0.5), (2.0, 0.5)]).moments();
        assert_eq!((m.mean, m.variance), (1.0, 1.0));
    }

    #[test]
    fn size_bias_examples() {
        let b = pmf(&[(0.0, 0.7), (1.0, 0.3)]).size_bias().unwrap();
        assert_eq!(b, FinitePmf::point_mass(1.0));
        let b = pmf(&[(1.0, 0.5), (3.0, 0.5)]).size_bias().unwrap();
        assert_eq!(b.atoms(), &[1.0, 3.0]);
        assert_relative_eq!(b.probs()[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(b.probs()[1], 0.75, epsilon = 1e-15);
        assert!(matches!(
            FinitePmf::point_mass(0.0).size_bias(),
            Err(Error::SizeBias(_))
        ));
        assert!(matches!(
            pmf(&[(-1.0, 0.5), (3.0, 0.5)]).size_bias(),
            Err(Error::SizeBias(_))
        ));
    }

    #[test]
    fn tv_examples() {
        let p = pmf(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(p.tv_distance(&p), 0.0);
        assert_eq!(FinitePmf::point_mass(0.0).tv_distance(&FinitePmf::point_mass(1.0)), 1.0);
        let q = pmf(&[(0.0, 0.25), (1.0, 0.75)]);
        assert_relative_eq!(p.tv_distance(&q), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn exact_tail_examples() {
        let p = pmf(&[(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(p.exact_tail(1.0, 1.0, -10.0, Side::Right).unwrap(), 1.0);
        assert_eq!(p.exact_tail(1.0, 1.0, 1.0, Side::Right).unwrap(), 0.5);
        assert_eq!(p.exact_tail(1.0, 1.0, 1.0, Side::Left).unwrap(), 0.5);
        let d = FinitePmf::point_mass(4.0);
        for side in Side::BOTH {
            assert_eq!(d.exact_tail(4.0, 1.0, 0.5, side).unwrap(), 0.0);
        }
        assert!(p.exact_tail(1.0, 0.0, 1.0, Side::Right).is_err());
    }

    #[test]
    fn construction_canonicalizes() {
        let p = pmf(&[(2.0, 0.25), (1.0, 0.0), (0.1 + 0.2, 0.25), (0.3, 0.5)]);
        assert_eq!(p.atoms(), &[0.3, 2.0]);
        assert_eq!(p.probs(), &[0.75, 0.25]);
        assert!(FinitePmf::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(FinitePmf::new(vec![0.0, 1.0], vec![-0.1, 1.1]).is_err());
        assert!(FinitePmf::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn json_shape() {
        let p = pmf(&[(0.0, 0.5), (2.0, 0.5)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"atoms":[0.0,2.0],"probs":[0.5,0.5]}"#);
        let back: FinitePmf = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<FinitePmf>(r#"{"atoms":[0],"probs":[0.3]}"#).is_err());
    }

    #[test]
    fn works_in_f32() {
        let p: FinitePmf<f32> = FinitePmf::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap();
        let b = p.size_bias().unwrap();
        assert!((b.probs()[1] - 0.75).abs() < 1e-6);
    }

    fn arb_pmf() -> impl Strategy<Value = FinitePmf> {
        prop::collection::vec((0u32..50, 1u32..100), 1..12)
            .prop_map(|v| FinitePmf::from_weights(v.into_iter().map(|(x, w)| (x as f64 * 0.5, w as f64))).unwrap())
    }

    proptest! {
        #[test]
        fn size_bias_mean_is_second_over_first_moment(p in arb_pmf()) {
            prop_assume!(p.mean() > 0.0);
            let b = p.size_bias().unwrap();
            let expected = p.raw_moment(2) / p.mean();
            prop_assert!((b.mean() - expected).abs() <= 1e-12 * expected.max(1.0));
        }

        #[test]
        fn size_bias_fixed_only_for_positive_point_masses(p in arb_pmf()) {
            prop_assume!(p.mean() > 0.0);
            let tv = p.size_bias().unwrap().tv_distance(&p);
            let point = p.len() == 1 && p.min_atom() > 0.0;
            prop_assert_eq!(tv == 0.0, point);
        }

        #[test]
        fn tv_is_a_bounded_symmetric_distance(p in arb_pmf(), q in arb_pmf()) {
            let d = p.tv_distance(&q);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!((d - q.tv_distance(&p)).abs() < 1e-15);
        }
    }
}
