//! Root enumeration. Three strategies, tried in order:
//! negative definite lattices go straight to short-vector search on `-G`;
//! pairing conditions against a positive definite family of full positive
//! rank give a positive definite majorant; otherwise an explicit box over the
//! hyperbolic coordinates reduces to the definite fiber.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fp::ShortVectors;
use super::linalg::{inverse, is_positive_definite, RatMatrix};
use super::{Lattice, LatticeError, LatticeVector, Summand};
use crate::rational::{rat, Rational};

#[derive(Debug, Clone)]
pub struct RootConstraint {
    pub norm: i64,
    /// `(w, k)` requires `<x, w> = k`.
    pub pairings: Vec<(LatticeVector, i64)>,
    pub coordinate_bound: Option<i64>,
}

impl RootConstraint {
    pub fn roots() -> Self {
        Self {
            norm: -2,
            pairings: Vec::new(),
            coordinate_bound: None,
        }
    }

    pub fn with_pairing(mut self, w: LatticeVector, value: i64) -> Self {
        self.pairings.push((w, value));
        self
    }

    pub fn with_bound(mut self, bound: i64) -> Self {
        self.coordinate_bound = Some(bound);
        self
    }
}

/// Integer linear functional `x -> sum coeffs_i x_i`, scaled so it is exact.
struct Functional {
    coeffs: Vec<i128>,
    target: i128,
}

impl Functional {
    fn holds(&self, x: &[i64]) -> bool {
        let s: i128 = self.coeffs.iter().zip(x).map(|(c, &v)| c * v as i128).sum();
        s == self.target
    }
}

fn lcm_of_denoms<'a>(it: impl Iterator<Item = &'a Rational>) -> BigInt {
    it.fold(BigInt::one(), |l, r| l.lcm(r.denom()))
}

fn functional(
    lattice: &Lattice,
    w: &LatticeVector,
    value: i64,
) -> Result<Functional, LatticeError> {
    let dual: Vec<Rational> = (0..lattice.rank())
        .map(|i| {
            lattice.gram()[i]
                .iter()
                .zip(w.coords())
                .map(|(&g, c)| c * rat(g))
                .sum()
        })
        .collect();
    let d = lcm_of_denoms(dual.iter());
    let conv = |r: Rational| -> Result<i128, LatticeError> {
        r.to_integer()
            .to_i128()
            .ok_or_else(|| LatticeError::InvalidConstraint("pairing vector too large".into()))
    };
    let dr = Rational::from_integer(d);
    Ok(Functional {
        coeffs: dual
            .into_iter()
            .map(|c| conv(c * &dr))
            .collect::<Result<_, _>>()?,
        target: conv(rat(value) * &dr)?,
    })
}

fn scaled_integer_gram(q: &RatMatrix) -> Result<(Vec<Vec<i64>>, BigInt), LatticeError> {
    let d = lcm_of_denoms(q.iter().flatten());
    let dr = Rational::from_integer(d.clone());
    let g = q
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    (x * &dr).to_integer().to_i64().ok_or_else(|| {
                        LatticeError::InvalidConstraint("majorant entries overflow".into())
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((g, d))
}

fn to_i128(b: &BigInt) -> Result<i128, LatticeError> {
    b.to_i128()
        .ok_or_else(|| LatticeError::InvalidConstraint("search bound overflows".into()))
}

/// Every `x` with `<x,x> = norm` meeting the constraint, as integer coordinates
/// in lexicographic order.
pub(crate) fn enumerate_root_coords(
    lattice: &Lattice,
    c: &RootConstraint,
) -> Result<Vec<Vec<i64>>, LatticeError> {
    if c.norm >= 0 {
        return Err(LatticeError::InvalidConstraint(format!(
            "norm must be negative, got {}",
            c.norm
        )));
    }
    if let Some(b) = c.coordinate_bound {
        if b < 1 {
            return Err(LatticeError::InvalidConstraint(format!(
                "coordinate bound must be >= 1, got {b}"
            )));
        }
    }
    for (w, _) in &c.pairings {
        if w.lattice() != lattice {
            return Err(LatticeError::LatticeMismatch(
                w.lattice().label().into(),
                lattice.label().into(),
            ));
        }
    }
    let funcs = c
        .pairings
        .iter()
        .map(|(w, k)| functional(lattice, w, *k))
        .collect::<Result<Vec<_>, _>>()?;
    let accept = |x: &[i64]| {
        funcs.iter().all(|f| f.holds(x))
            && c.coordinate_bound
                .is_none_or(|b| x.iter().all(|v| v.abs() <= b))
            && lattice.pair_i64(x, x) == c.norm as i128
    };

    let (p, _) = lattice.signature();
    let mut out: Vec<Vec<i64>> = if p == 0 {
        let neg: Vec<Vec<i64>> = lattice
            .gram()
            .iter()
            .map(|r| r.iter().map(|v| -v).collect())
            .collect();
        let sv = ShortVectors::new(neg).expect("negative definite lattice");
        sv.collect(-c.norm as i128)
            .into_iter()
            .map(|(x, _)| x)
            .filter(|x| accept(x))
            .collect()
    } else if let Some(found) = majorant_search(lattice, c, &accept)? {
        found
    } else if let Some(b) = c.coordinate_bound {
        box_search(lattice, c.norm, b, &accept)
    } else {
        return Err(LatticeError::UnboundedConstraint(format!(
            "indefinite lattice {} needs {p} positive definite pairing conditions or a coordinate bound",
            lattice.label()
        )));
    };
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn enumerate_roots(
    lattice: &Lattice,
    constraint: &RootConstraint,
) -> Result<Vec<LatticeVector>, LatticeError> {
    enumerate_root_coords(lattice, constraint)?
        .iter()
        .map(|x| lattice.int_vector(x))
        .collect()
}

/// With pairing vectors `w_1..w_k` whose Gram `P` is positive definite and
/// `k = p`, the form `Q(x) = -<x,x> + 2 (Gx . W)^T P^{-1} (Gx . W)` is positive
/// definite, and on solutions equals `-norm + 2 c^T P^{-1} c`.
fn majorant_search(
    lattice: &Lattice,
    c: &RootConstraint,
    accept: &impl Fn(&[i64]) -> bool,
) -> Result<Option<Vec<Vec<i64>>>, LatticeError> {
    let (p, _) = lattice.signature();
    if c.pairings.len() != p {
        return Ok(None);
    }
    let n = lattice.rank();
    let k = p;
    let ws: Vec<&LatticeVector> = c.pairings.iter().map(|(w, _)| w).collect();
    let pm: RatMatrix = ws
        .iter()
        .map(|a| {
            ws.iter()
                .map(|b| lattice.pair_rat(a.coords(), b.coords()))
                .collect()
        })
        .collect();
    if !is_positive_definite(&pm) {
        return Ok(None);
    }
    let pinv = inverse(&pm).expect("positive definite");
    // a[i][j] = <w_i, e_j>
    let a: RatMatrix = ws
        .iter()
        .map(|w| {
            (0..n)
                .map(|j| {
                    w.coords()
                        .iter()
                        .zip(lattice.gram())
                        .map(|(cw, row)| cw * rat(row[j]))
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut q: RatMatrix = lattice
        .gram()
        .iter()
        .map(|r| r.iter().map(|&v| rat(-v)).collect())
        .collect();
    for (s, qrow) in q.iter_mut().enumerate() {
        for (t, entry) in qrow.iter_mut().enumerate() {
            let mut acc = rat(0);
            for i in 0..k {
                if a[i][s].is_zero() {
                    continue;
                }
                for j in 0..k {
                    acc += &a[i][s] * &pinv[i][j] * &a[j][t];
                }
            }
            *entry += acc * rat(2);
        }
    }
    let cv: Vec<Rational> = c.pairings.iter().map(|(_, v)| rat(*v)).collect();
    let mut quad = rat(0);
    for i in 0..k {
        for j in 0..k {
            quad += &cv[i] * &pinv[i][j] * &cv[j];
        }
    }
    let bound = rat(-c.norm) + quad * rat(2);
    let (g, d) = scaled_integer_gram(&q)?;
    let Some(sv) = ShortVectors::new(g) else {
        return Ok(None);
    };
    let scaled = (bound * Rational::from_integer(d)).floor().to_integer();
    let b = to_i128(&scaled)?;
    let mut found = Vec::new();
    sv.for_each(b, |x, _| {
        if accept(x) {
            found.push(x.to_vec());
        }
    });
    Ok(Some(found))
}

/// Scans the hyperbolic coordinates in `[-b, b]` and enumerates the definite
/// fiber for each choice.
fn box_search(
    lattice: &Lattice,
    norm: i64,
    b: i64,
    accept: &impl Fn(&[i64]) -> bool,
) -> Vec<Vec<i64>> {
    let hyp = lattice.hyperbolic_offsets();
    let def_idx: Vec<usize> = lattice
        .blocks()
        .filter(|(_, s)| *s != Summand::Hyperbolic)
        .flat_map(|(o, s)| o..o + s.rank())
        .collect();
    let fiber_gram: Vec<Vec<i64>> = def_idx
        .iter()
        .map(|&i| def_idx.iter().map(|&j| -lattice.gram()[i][j]).collect())
        .collect();
    let fiber = ShortVectors::new(fiber_gram).expect("definite blocks");
    let width = (2 * b + 1) as usize;
    let slots = 2 * hyp.len();
    let total = width.pow(slots as u32);
    let mut out = Vec::new();
    let mut x = vec![0i64; lattice.rank()];
    for code in 0..total {
        let mut rest = code;
        let mut h = 0i128;
        for &o in &hyp {
            let u = (rest % width) as i64 - b;
            rest /= width;
            let v = (rest % width) as i64 - b;
            rest /= width;
            x[o] = u;
            x[o + 1] = v;
            h += 2 * u as i128 * v as i128;
        }
        // definite part must have norm `norm - h` <= 0
        let need = h - norm as i128;
        fiber.for_each(need, |y, q| {
            if q != need {
                return;
            }
            for (k, &i) in def_idx.iter().enumerate() {
                x[i] = y[k];
            }
            if accept(&x) {
                out.push(x.clone());
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use std::time::Instant;

    #[test]
    fn e8_has_240_roots() {
        let e8 = make_lattice("E8(-1)").unwrap();
        let t = Instant::now();
        let r = enumerate_root_coords(&e8, &RootConstraint::roots()).unwrap();
        assert_eq!(r.len(), 240);
        assert!(t.elapsed().as_secs_f64() < 1.0);
        let mut neg: Vec<Vec<i64>> = r.iter().map(|x| x.iter().map(|v| -v).collect()).collect();
        neg.sort();
        assert_eq!(neg, r);
    }

    #[test]
    fn rank_one_and_hyperbolic_roots() {
        let a = make_lattice("<-2>").unwrap();
        assert_eq!(
            enumerate_root_coords(&a, &RootConstraint::roots()).unwrap(),
            vec![vec![-1], vec![1]]
        );
        let u = make_lattice("U").unwrap();
        let got = enumerate_root_coords(&u, &RootConstraint::roots().with_bound(5)).unwrap();
        assert_eq!(got, vec![vec![-1, 1], vec![1, -1]]);
        assert!(matches!(
            enumerate_root_coords(&u, &RootConstraint::roots()),
            Err(LatticeError::UnboundedConstraint(_))
        ));
    }

    #[test]
    fn majorant_matches_box() {
        let s = make_lattice("U+E8(-1)").unwrap();
        let mut l = vec![0i64; 10];
        l[0] = 1;
        l[1] = 1;
        let lv = s.int_vector(&l).unwrap();
        for n in 0..=3 {
            let fast =
                enumerate_root_coords(&s, &RootConstraint::roots().with_pairing(lv.clone(), n))
                    .unwrap();
            let slow = enumerate_root_coords(
                &s,
                &RootConstraint::roots()
                    .with_pairing(lv.clone(), n)
                    .with_bound(3),
            )
            .unwrap();
            let clipped: Vec<_> = fast
                .iter()
                .filter(|x| x.iter().all(|v| v.abs() <= 3))
                .cloned()
                .collect();
            assert!(!slow.is_empty());
            assert_eq!(clipped, slow, "n = {n}");
        }
        let walls = enumerate_root_coords(&s, &RootConstraint::roots().with_pairing(lv.clone(), 0))
            .unwrap();
        assert_eq!(walls.len(), 242);
        let a1 = enumerate_root_coords(&s, &RootConstraint::roots().with_pairing(lv, 1)).unwrap();
        assert_eq!(a1.len(), 480);
    }

    #[test]
    fn rejects_bad_constraints() {
        let e8 = make_lattice("E8(-1)").unwrap();
        let c = RootConstraint {
            norm: 2,
            pairings: vec![],
            coordinate_bound: None,
        };
        assert!(matches!(
            enumerate_root_coords(&e8, &c),
            Err(LatticeError::InvalidConstraint(_))
        ));
        assert!(matches!(
            enumerate_root_coords(&e8, &RootConstraint::roots().with_bound(0)),
            Err(LatticeError::InvalidConstraint(_))
        ));
    }
}
