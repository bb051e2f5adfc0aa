//! Roots graded by their pairing with a polarization, the products
//! `q^w prod (1 - q^n)^(a_n)` they define, and the Lambert-series identity
//! for the logarithmic derivative.

mod series;
mod theta;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::{
    enumerate_roots, Lattice, LatticeError, LatticeVector, RootConstraint, Summand,
};
use crate::rational::{format_rational, Rational};

pub use series::{euler_product, lambert_coefficients, PowerSeries};
pub use theta::{convolve, enumerated_counts, theta_counts};

pub const DEFAULT_ORDER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("<l,l> = {0} is not positive")]
    NotPolarization(String),
    #[error("signature ({0}, {1}) is not (1, k)")]
    NotHyperbolic(usize, usize),
    #[error("truncation order {0} is negative")]
    NegativeTruncation(i64),
    #[error("<v,v> = {0} is not positive")]
    NotPositiveNorm(String),
    #[error("{0}")]
    UnsupportedShape(String),
    #[error("count exceeds 128-bit range")]
    Overflow,
    #[error("leading coefficient {0} is not a unit")]
    NotInvertible(String),
    #[error("offsets {0} and {1} differ")]
    OffsetMismatch(String, String),
}

impl CountError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Lattice(e) => e.code(),
            Self::NotPolarization(_) => "NotPolarization",
            Self::NotHyperbolic(..) => "NotHyperbolic",
            Self::NegativeTruncation(_) => "NegativeTruncation",
            Self::NotPositiveNorm(_) => "NotPositiveNorm",
            Self::UnsupportedShape(_) => "UnsupportedShape",
            Self::Overflow => "Overflow",
            Self::NotInvertible(_) => "NotInvertible",
            Self::OffsetMismatch(..) => "OffsetMismatch",
        }
    }
}

/// How the fiber counts are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountStrategy {
    /// `U + definite blocks`, `l` in the first `U`: closed-form block thetas.
    Theta,
    /// Same shape, block counts by short-vector enumeration.
    ShortVectors,
    /// Any shape: list the roots of each degree.
    Direct,
}

#[derive(Debug, Clone)]
pub struct CountProfile {
    lattice: Lattice,
    l: LatticeVector,
    a: Vec<BigInt>,
    walls: Vec<LatticeVector>,
}

impl CountProfile {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn polarization(&self) -> &LatticeVector {
        &self.l
    }

    /// `a[n - 1] = a_n`.
    pub fn counts(&self) -> &[BigInt] {
        &self.a
    }

    pub fn max_degree(&self) -> usize {
        self.a.len()
    }

    pub fn walls(&self) -> &[LatticeVector] {
        &self.walls
    }

    /// A profile with given counts, for series arithmetic on synthetic data.
    pub fn synthetic(lattice: &Lattice, l: LatticeVector, a: Vec<BigInt>) -> Self {
        Self {
            lattice: lattice.clone(),
            l,
            a,
            walls: Vec::new(),
        }
    }

    /// `n,a_n,c_n` rows with `c` the Lambert coefficients.
    pub fn to_csv(&self) -> String {
        let c = lambert_coefficients(&self.a);
        let mut s = String::from("n,a_n,c_n\n");
        for n in 1..=self.a.len() {
            s.push_str(&format!("{n},{},{}\n", self.a[n - 1], c[n]));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lattice": self.lattice.label(),
            "l": self.l.coords().iter().map(format_rational).collect::<Vec<_>>(),
            "a": self.a.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "walls": self.walls.iter().map(|w| w.coords().iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

fn check_polarization(s: &Lattice, l: &LatticeVector) -> Result<Vec<i64>, CountError> {
    let (p, q) = s.signature();
    if p != 1 {
        return Err(CountError::NotHyperbolic(p, q));
    }
    if l.lattice() != s {
        return Err(
            LatticeError::LatticeMismatch(l.lattice().label().into(), s.label().into()).into(),
        );
    }
    let ll = l.norm();
    if !ll.is_positive() {
        return Err(CountError::NotPolarization(format_rational(&ll)));
    }
    l.to_i64().ok_or_else(|| LatticeError::NotIntegral.into())
}

/// `(alpha, beta)` when `S = U + definite blocks` and `l = (alpha, beta, 0)`
/// with both entries positive.
fn fiber_shape(s: &Lattice, l: &[i64]) -> Option<(i64, i64)> {
    let sm = s.summands();
    if sm.first() != Some(&Summand::Hyperbolic) || sm[1..].contains(&Summand::Hyperbolic) {
        return None;
    }
    if l[2..].iter().any(|&x| x != 0) || l[0] <= 0 || l[1] <= 0 {
        return None;
    }
    Some((l[0], l[1]))
}

/// With `delta = (a, b, v)`: `<delta,l> = a beta + b alpha` and
/// `<delta,delta> = 2ab - |v|^2`, so roots of degree `n` are indexed by
/// `(a, b)` with `ab >= -1` and a definite vector of norm `2ab + 2`.
fn fiber_counts(
    s: &Lattice,
    (alpha, beta): (i64, i64),
    max_degree: usize,
    block: impl Fn(Summand, usize) -> Result<Vec<i128>, CountError>,
) -> Result<Vec<BigInt>, CountError> {
    let n_max = max_degree as i64;
    let top = (n_max * n_max / (2 * alpha * beta) + 2) as usize;
    let mut r = vec![0i128; top + 1];
    r[0] = 1;
    for &sm in &s.summands()[1..] {
        r = convolve(&r, &block(sm, top)?, top)?;
    }
    let mut a = vec![BigInt::zero(); max_degree];
    for n in 1..=n_max {
        let mut total = BigInt::zero();
        for ai in -1..=n / beta + 1 {
            let rest = n - ai * beta;
            if rest % alpha != 0 {
                continue;
            }
            let bi = rest / alpha;
            let m = 2 * ai * bi + 2;
            if m < 0 {
                continue;
            }
            total += BigInt::from(r[m as usize]);
        }
        a[(n - 1) as usize] = total;
    }
    Ok(a)
}

fn direct_counts(
    s: &Lattice,
    l: &LatticeVector,
    max_degree: usize,
) -> Result<Vec<BigInt>, CountError> {
    (1..=max_degree)
        .map(|n| {
            let c = RootConstraint::roots().with_pairing(l.clone(), n as i64);
            Ok(BigInt::from(enumerate_roots(s, &c)?.len()))
        })
        .collect()
}

/// Roots `delta` with `<delta,l> = 0`.
pub fn walls(s: &Lattice, l: &LatticeVector) -> Result<Vec<LatticeVector>, CountError> {
    check_polarization(s, l)?;
    Ok(enumerate_roots(
        s,
        &RootConstraint::roots().with_pairing(l.clone(), 0),
    )?)
}

pub fn count_roots_with_strategy(
    s: &Lattice,
    l: &LatticeVector,
    max_degree: usize,
    strategy: CountStrategy,
) -> Result<CountProfile, CountError> {
    let li = check_polarization(s, l)?;
    let a = match strategy {
        CountStrategy::Direct => direct_counts(s, l, max_degree)?,
        CountStrategy::Theta | CountStrategy::ShortVectors => {
            let shape = fiber_shape(s, &li).ok_or_else(|| {
                CountError::UnsupportedShape(format!(
                    "{} with this l is not U plus definite blocks with l in the first U",
                    s.label()
                ))
            })?;
            if strategy == CountStrategy::Theta {
                fiber_counts(s, shape, max_degree, theta_counts)?
            } else {
                fiber_counts(s, shape, max_degree, enumerated_counts)?
            }
        }
    };
    Ok(CountProfile {
        lattice: s.clone(),
        l: l.clone(),
        a,
        walls: walls(s, l)?,
    })
}

/// Uses the theta route when the shape allows it, listing otherwise.
pub fn count_roots_with_degree(
    s: &Lattice,
    l: &LatticeVector,
    max_degree: usize,
) -> Result<CountProfile, CountError> {
    let li = check_polarization(s, l)?;
    let strategy = if fiber_shape(s, &li).is_some() {
        CountStrategy::Theta
    } else {
        CountStrategy::Direct
    };
    count_roots_with_strategy(s, l, max_degree, strategy)
}

/// `q^w prod_{n <= N} (1 - q^n)^(a_n)` truncated at the profile's degree.
pub fn product_expansion(profile: &CountProfile, weyl_exponent: &Rational) -> PowerSeries {
    let order = profile.max_degree();
    let mut s = PowerSeries::one(order);
    for (i, a) in profile.a.iter().enumerate() {
        s.mul_binomial(i + 1, a);
    }
    s.with_offset(weyl_exponent.clone())
}

/// `sum_m (sum_{d | m} d a_d) q^m`.
pub fn log_derivative_series(profile: &CountProfile) -> PowerSeries {
    let c = lambert_coefficients(&profile.a);
    PowerSeries::new(Rational::zero(), c, profile.max_degree() as i64)
        .expect("order is non-negative")
}

/// Roots with `|<delta,v>| <= bound` lying on the wrong side of `v`: those
/// with `<delta,v> <= 0`, restricted to `<delta,reference> > 0` when a
/// reference polarization fixes the positive roots.
pub fn chamber_walls(
    s: &Lattice,
    v: &LatticeVector,
    bound: i64,
    reference: Option<&LatticeVector>,
) -> Result<Vec<LatticeVector>, CountError> {
    if v.lattice() != s {
        return Err(
            LatticeError::LatticeMismatch(v.lattice().label().into(), s.label().into()).into(),
        );
    }
    let vv = v.norm();
    if !vv.is_positive() {
        return Err(CountError::NotPositiveNorm(format_rational(&vv)));
    }
    let mut out = Vec::new();
    for h in -bound.abs()..=0 {
        let c = RootConstraint::roots().with_pairing(v.clone(), h);
        for d in enumerate_roots(s, &c)? {
            let keep = match reference {
                Some(l) => crate::lattice::pair(&d, l)?.is_positive(),
                None => true,
            };
            if keep {
                out.push(d);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use crate::orbit::random_isometry;
    use crate::rational::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn l_for(s: &Lattice) -> LatticeVector {
        let mut c = vec![0i64; s.rank()];
        c[0] = 1;
        c[1] = 1;
        s.int_vector(&c).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hyperbolic_plane_has_only_walls() {
        let u = make_lattice("U").unwrap();
        let p = count_roots_with_degree(&u, &l_for(&u), 5).unwrap();
        assert!(p.counts().iter().all(|x| x.is_zero()));
        assert_eq!(p.walls().len(), 2);
        let d = count_roots_with_strategy(&u, &l_for(&u), 5, CountStrategy::Direct).unwrap();
        assert_eq!(d.counts(), p.counts());
    }

    #[test]
    fn u_e8_known_counts() {
        let s = make_lattice("U+E8(-1)").unwrap();
        let p = count_roots_with_degree(&s, &l_for(&s), 3).unwrap();
        assert_eq!(p.counts(), &ints(&[480, 2640, 13920])[..]);
        assert_eq!(p.walls().len(), 242);
    }

    #[test]
    fn strategies_agree() {
        for desc in ["U+E8(-1)", "U+E8(-1)^2", "U+<-4>+E8(-1)"] {
            let s = make_lattice(desc).unwrap();
            let l = l_for(&s);
            let t = count_roots_with_strategy(&s, &l, 6, CountStrategy::Theta).unwrap();
            let f = count_roots_with_strategy(&s, &l, 6, CountStrategy::ShortVectors).unwrap();
            assert_eq!(t.counts(), f.counts(), "{desc}");
        }
    }

    #[test]
    fn direct_listing_agrees_in_low_degree() {
        let s = make_lattice("U+E8(-1)").unwrap();
        let l = l_for(&s);
        let t = count_roots_with_strategy(&s, &l, 3, CountStrategy::Theta).unwrap();
        let d = count_roots_with_strategy(&s, &l, 3, CountStrategy::Direct).unwrap();
        assert_eq!(t.counts(), d.counts());
        let s = make_lattice("U+<-2>").unwrap();
        let l = s.int_vector(&[2, 1, 0]).unwrap();
        let t = count_roots_with_strategy(&s, &l, 12, CountStrategy::Theta).unwrap();
        let d = count_roots_with_strategy(&s, &l, 12, CountStrategy::Direct).unwrap();
        assert_eq!(t.counts(), d.counts());
    }

    #[test]
    fn invariant_under_isometry() {
        let s = make_lattice("U+E8(-1)").unwrap();
        let l = l_for(&s);
        let base = count_roots_with_degree(&s, &l, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let w = random_isometry(&s, &mut rng, 4).unwrap();
            let moved = w.apply(&l).unwrap();
            let p = count_roots_with_strategy(&s, &moved, 2, CountStrategy::Direct).unwrap();
            assert_eq!(p.counts(), base.counts());
            assert_eq!(p.walls().len(), base.walls().len());
        }
    }

    #[test]
    fn polarization_errors() {
        let u = make_lattice("U").unwrap();
        let bad = u.int_vector(&[1, -1]).unwrap();
        assert!(matches!(
            count_roots_with_degree(&u, &bad, 3),
            Err(CountError::NotPolarization(_))
        ));
        let e8 = make_lattice("E8(-1)").unwrap();
        assert!(matches!(
            count_roots_with_degree(&e8, &e8.basis(0), 3),
            Err(CountError::NotHyperbolic(0, 8))
        ));
    }

    #[test]
    fn product_and_log_derivative() {
        let u = make_lattice("U").unwrap();
        let l = l_for(&u);
        let zero = CountProfile::synthetic(&u, l.clone(), ints(&[0; 6]));
        assert_eq!(
            product_expansion(&zero, &rat(3)),
            PowerSeries::one(6).with_offset(rat(3))
        );
        let one = CountProfile::synthetic(&u, l.clone(), ints(&[1, 0, 0, 0]));
        assert_eq!(
            product_expansion(&one, &rat(0)).coeffs(),
            &ints(&[1, -1, 0, 0, 0])[..]
        );
        assert_eq!(
            log_derivative_series(&one).coeffs(),
            &ints(&[0, 1, 1, 1, 1])[..]
        );
        let all = CountProfile::synthetic(&u, l, ints(&[1; 30]));
        assert_eq!(
            product_expansion(&all, &rat(0)).coeffs(),
            euler_product(30).unwrap().coeffs()
        );
    }

    #[test]
    fn counting_identity_u_e8() {
        let s = make_lattice("U+E8(-1)").unwrap();
        let p = count_roots_with_degree(&s, &l_for(&s), 40).unwrap();
        let lhs = product_expansion(&p, &rat(0)).neg_log_derivative().unwrap();
        assert_eq!(lhs, log_derivative_series(&p));
    }

    #[test]
    fn chamber_walls_in_u() {
        let u = make_lattice("U").unwrap();
        let v = u.int_vector(&[2, 1]).unwrap();
        let w = chamber_walls(&u, &v, 3, None).unwrap();
        assert_eq!(w, vec![u.int_vector(&[1, -1]).unwrap()]);
        assert!(chamber_walls(&u, &v, 3, Some(&v)).unwrap().is_empty());
        let s = make_lattice("U+E8(-1)").unwrap();
        let l = s.int_vector(&[3, 2, 0, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        assert!(chamber_walls(&s, &l, 4, Some(&l)).unwrap().is_empty());
        let iso = u.int_vector(&[1, 0]).unwrap();
        assert!(matches!(
            chamber_walls(&u, &iso, 3, None),
            Err(CountError::NotPositiveNorm(_))
        ));
    }
}
