use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::{require_root, BlockMove, Generator, IsometryWord, OrbitError, ReductionCertificate};
use crate::lattice::fp::ShortVectors;
use crate::lattice::linalg::bezout;
use crate::lattice::{Lattice, LatticeVector, Summand};
use crate::rational::{from_int, rat, round_half_up, to_f64, Rational};

pub const DEFAULT_BUDGET: usize = 10_000;

/// `M = L + U_last`, where `U_last` is the last hyperbolic summand.
struct Split {
    ambient: Lattice,
    sub: Option<Lattice>,
    /// `sub` coordinate `i` sits at ambient coordinate `idx[i]`.
    idx: Vec<usize>,
    off: usize,
    summand: usize,
}

impl Split {
    fn last(ambient: &Lattice) -> Result<Self, OrbitError> {
        let (summand, (off, _)) = ambient
            .blocks()
            .enumerate()
            .filter(|(_, (_, s))| *s == Summand::Hyperbolic)
            .last()
            .ok_or_else(|| OrbitError::UnsupportedLattice(ambient.label().into()))?;
        let rest: Vec<Summand> = ambient
            .summands()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != summand)
            .map(|(_, s)| *s)
            .collect();
        let sub = if rest.is_empty() {
            None
        } else {
            Some(Lattice::from_summands(rest)?)
        };
        let idx = (0..ambient.rank())
            .filter(|&i| i != off && i != off + 1)
            .collect();
        Ok(Self {
            ambient: ambient.clone(),
            sub,
            idx,
            off,
            summand,
        })
    }

    fn v_part(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.idx.iter().map(|&i| x[i].clone()).collect()
    }

    fn embed(&self, v: &[BigInt], m: BigInt, n: BigInt) -> Vec<BigInt> {
        let mut x = vec![BigInt::zero(); self.ambient.rank()];
        for (k, &i) in self.idx.iter().enumerate() {
            x[i] = v[k].clone();
        }
        x[self.off] = m;
        x[self.off + 1] = n;
        x
    }
}

fn pair_rat_int(lat: &Lattice, v: &[Rational], w: &[BigInt]) -> Rational {
    let wr: Vec<Rational> = w.iter().map(from_int).collect();
    lat.pair_rat(v, &wr)
}

/// Finds `mu` in `L` with `|<v - mu, v - mu> - x| < 1` using an isotropic pair
/// `(rho, rho')` with `<v, rho>` non-integral.
fn shift_via_isotropic(
    lat: &Lattice,
    v: &[Rational],
    x: &Rational,
) -> Result<Vec<BigInt>, OrbitError> {
    let n = lat.rank();
    let unit = |i: usize| {
        let mut e = vec![BigInt::zero(); n];
        e[i] = BigInt::one();
        e
    };
    let mut pair = None;
    for (o, s) in lat.blocks() {
        if s != Summand::Hyperbolic {
            continue;
        }
        // <v, e_o> is the coordinate at o+1 and vice versa
        if !v[o + 1].is_integer() {
            pair = Some((unit(o), unit(o + 1)));
        } else if !v[o].is_integer() {
            pair = Some((unit(o + 1), unit(o)));
        }
        if pair.is_some() {
            break;
        }
    }
    if pair.is_none() {
        let hyp = lat
            .blocks()
            .find(|(_, s)| *s == Summand::Hyperbolic)
            .map(|(o, _)| o);
        if let Some(o) = hyp {
            for (b, s) in lat.blocks() {
                if s == Summand::Hyperbolic {
                    continue;
                }
                for j in b..b + s.rank() {
                    let e = unit(j);
                    if pair_rat_int(lat, v, &e).is_integer() {
                        continue;
                    }
                    let k = -lat.gram()[j][j] / 2;
                    let mut rho = e;
                    rho[o] = BigInt::one();
                    rho[o + 1] = BigInt::from(k);
                    pair = Some((rho, unit(o + 1)));
                    break;
                }
                if pair.is_some() {
                    break;
                }
            }
        }
    }
    let (rho, rho_p) = pair.ok_or(OrbitError::NoUsableIsotropic)?;
    let a = pair_rat_int(lat, v, &rho);
    let b = pair_rat_int(lat, v, &rho_p);
    let lam2 = lat.pair_rat(v, v) - &a * &b * rat(2);
    let m = a.floor().to_integer();
    let frac = &a - from_int(&m);
    let nn = round_half_up(&(&b - (x - &lam2) / (frac * rat(2))));
    Ok(rho_p
        .iter()
        .zip(&rho)
        .map(|(rp, r)| &m * rp + &nn * r)
        .collect())
}

/// Same goal on a negative definite `L`, by a closest-vector search.
fn shift_via_closest(
    lat: &Lattice,
    v: &[Rational],
    x: &Rational,
) -> Result<Vec<BigInt>, OrbitError> {
    let neg: Vec<Vec<i64>> = lat
        .gram()
        .iter()
        .map(|r| r.iter().map(|g| -g).collect())
        .collect();
    let sv = ShortVectors::new(neg).ok_or(OrbitError::NoUsableIsotropic)?;
    // need -<v-mu, v-mu> within 1 of -x
    let radius = to_f64(&(rat(1) - x));
    if radius <= 0.0 {
        return Err(OrbitError::NoUsableIsotropic);
    }
    let target: Vec<f64> = v.iter().map(to_f64).collect();
    let mut best: Option<(Rational, Vec<i64>)> = None;
    sv.near(&target, radius, |mu| {
        let diff: Vec<Rational> = v.iter().zip(mu).map(|(a, &b)| a - rat(b)).collect();
        let gap = (lat.pair_rat(&diff, &diff) - x).abs();
        if gap >= rat(1) {
            return;
        }
        let better = match &best {
            None => true,
            Some((g, m)) => gap < *g || (gap == *g && mu < m.as_slice()),
        };
        if better {
            best = Some((gap, mu.to_vec()));
        }
    });
    best.map(|(_, mu)| mu.into_iter().map(BigInt::from).collect())
        .ok_or(OrbitError::NoUsableIsotropic)
}

fn norm_shift(lat: &Lattice, v: &[Rational], x: &Rational) -> Result<Vec<BigInt>, OrbitError> {
    if v.iter().all(|c| c.is_integer()) {
        return Err(OrbitError::VectorInLattice);
    }
    let mu = if lat.hyperbolic_offsets().is_empty() {
        shift_via_closest(lat, v, x)?
    } else {
        shift_via_isotropic(lat, v, x)?
    };
    let diff: Vec<Rational> = v.iter().zip(&mu).map(|(a, b)| a - from_int(b)).collect();
    let gap = (lat.pair_rat(&diff, &diff) - x).abs();
    if gap >= rat(1) {
        return Err(OrbitError::NoUsableIsotropic);
    }
    Ok(mu)
}

/// `mu` in the lattice of `v` with `|<v-mu, v-mu> - x| < 1`, for `v` outside
/// the lattice.
pub fn approximate_norm_shift(
    v: &LatticeVector,
    x: &Rational,
) -> Result<LatticeVector, OrbitError> {
    let mu = norm_shift(v.lattice(), v.coords(), x)?;
    Ok(v.lattice().big_vector(&mu)?)
}

struct Reducer {
    split: Split,
    word: IsometryWord,
    budget: usize,
}

impl Reducer {
    fn new(ambient: &Lattice, budget: usize) -> Result<Self, OrbitError> {
        Ok(Self {
            split: Split::last(ambient)?,
            word: IsometryWord::identity(ambient),
            budget,
        })
    }

    fn push(&mut self, g: Generator, x: &[BigInt]) -> Result<Vec<BigInt>, OrbitError> {
        if self.word.len() >= self.budget {
            return Err(OrbitError::BudgetExceeded(self.budget));
        }
        self.word.push(g.clone())?;
        Ok(g.apply(&self.split.ambient, x))
    }

    /// Drives `m = <x, e>` to `0`, or to `1` with `v/m` integral.
    fn gamma1(&mut self, mut x: Vec<BigInt>) -> Result<Vec<BigInt>, OrbitError> {
        let off = self.split.off;
        loop {
            let m = x[off].clone();
            if m.is_zero() {
                return Ok(x);
            }
            let v = self.split.v_part(&x);
            if v.iter().all(|c| c.is_multiple_of(&m)) {
                if m.is_negative() {
                    x = self.push(Generator::SignFlip, &x)?;
                }
                return Ok(x);
            }
            let sub = self
                .split
                .sub
                .clone()
                .expect("non-empty v implies a complement");
            let mr = from_int(&m);
            let w: Vec<Rational> = v.iter().map(|c| from_int(c) / &mr).collect();
            let target = rat(-2) / (&mr * &mr);
            let mu = norm_shift(&sub, &w, &target)?;
            let half = (sub.pair_int(&mu, &mu) + BigInt::from(2)) / BigInt::from(2);
            let delta = self.split.embed(&mu, BigInt::one(), -half);
            let next = self.push(Generator::Reflection { root: delta }, &x)?;
            if next[off].abs() >= m.abs() {
                return Err(OrbitError::Stalled {
                    from: m.to_string(),
                    to: next[off].to_string(),
                });
            }
            x = next;
        }
    }

    fn certificate(
        self,
        input: &LatticeVector,
        x: &[BigInt],
    ) -> Result<ReductionCertificate, OrbitError> {
        let output = self.split.ambient.big_vector(x)?;
        Ok(ReductionCertificate {
            input: input.clone(),
            steps: self.word.len(),
            word: self.word,
            output,
        })
    }
}

/// Conjugates a root under reflections in roots pairing to `1` with `e` until
/// `<r, e> = 0`, or `<r, e> = 1` with `v` divisible by it.
pub fn gamma1_reduce(r: &LatticeVector) -> Result<ReductionCertificate, OrbitError> {
    let x = require_root(r)?;
    let mut red = Reducer::new(r.lattice(), DEFAULT_BUDGET)?;
    let out = red.gamma1(x)?;
    red.certificate(r, &out)
}

pub fn canonicalize_root(delta: &LatticeVector) -> Result<ReductionCertificate, OrbitError> {
    canonicalize_root_with_budget(delta, DEFAULT_BUDGET)
}

/// Carries a root to `f1 - f2` in the first hyperbolic summand.
pub fn canonicalize_root_with_budget(
    delta: &LatticeVector,
    budget: usize,
) -> Result<ReductionCertificate, OrbitError> {
    let x = require_root(delta)?;
    let lat = delta.lattice();
    let (first_summand, (first_off, _)) = lat
        .blocks()
        .enumerate()
        .find(|(_, (_, s))| *s == Summand::Hyperbolic)
        .ok_or_else(|| OrbitError::UnsupportedLattice(lat.label().into()))?;
    let mut canonical = vec![BigInt::zero(); lat.rank()];
    canonical[first_off] = BigInt::one();
    canonical[first_off + 1] = -BigInt::one();

    let mut red = Reducer::new(lat, budget)?;
    if x == canonical {
        return red.certificate(delta, &x);
    }
    let mut x = red.gamma1(x)?;
    let off = red.split.off;

    if x[off].is_zero() {
        let sub = red
            .split
            .sub
            .clone()
            .expect("m = 0 root has a complement part");
        let v = red.split.v_part(&x);
        let (g, lam1) = bezout(&sub.dual_int(&v));
        if !g.is_one() {
            return Err(OrbitError::NoUsableIsotropic);
        }
        let k = x[off + 1].clone();
        if !k.is_zero() {
            let lambda: Vec<BigInt> = lam1.iter().map(|c| c * &k).collect();
            let lambda = red.split.embed(&lambda, BigInt::zero(), BigInt::zero());
            x = red.push(
                Generator::Transvection {
                    lambda,
                    split: red.split.summand,
                },
                &x,
            )?;
        }
        let half = (sub.pair_int(&lam1, &lam1) + BigInt::from(2)) / BigInt::from(2);
        let root = red.split.embed(&lam1, BigInt::one(), -half);
        x = red.push(Generator::Reflection { root }, &x)?;
    }

    // m = 1: the transvection by -v lands on (0, 1, -1)
    let v = red.split.v_part(&x);
    if v.iter().any(|c| !c.is_zero()) {
        let neg: Vec<BigInt> = v.iter().map(|c| -c).collect();
        let lambda = red.split.embed(&neg, BigInt::zero(), BigInt::zero());
        x = red.push(
            Generator::Transvection {
                lambda,
                split: red.split.summand,
            },
            &x,
        )?;
    }
    if red.split.summand != first_summand {
        x = red.push(
            Generator::Block(BlockMove::Swap(first_summand, red.split.summand)),
            &x,
        )?;
    }
    debug_assert_eq!(x, canonical);
    red.certificate(delta, &x)
}

fn small_divisors(c: &BigInt, limit: u64) -> Vec<u64> {
    let a = c.abs();
    (1..=limit)
        .filter(|&d| (&a % BigInt::from(d)).is_zero())
        .collect()
}

/// A pseudorandom root: a random vector off the first hyperbolic summand,
/// completed inside that summand, then moved by two random reflections.
pub fn random_root(
    lat: &Lattice,
    rng: &mut impl Rng,
    size: i64,
) -> Result<LatticeVector, OrbitError> {
    let hyp = lat.hyperbolic_offsets();
    let o1 = *hyp
        .first()
        .ok_or_else(|| OrbitError::UnsupportedLattice(lat.label().into()))?;
    let n = lat.rank();
    let mut x: Vec<BigInt> = (0..n)
        .map(|i| {
            if i == o1 || i == o1 + 1 {
                BigInt::zero()
            } else {
                BigInt::from(rng.gen_range(-size..=size))
            }
        })
        .collect();
    let c = (BigInt::from(-2) - lat.pair_int(&x, &x)) / BigInt::from(2);
    if c.is_zero() {
        x[o1 + 1] = BigInt::from(rng.gen_range(-size..=size));
    } else {
        let divs = small_divisors(&c, 1000);
        let d = BigInt::from(divs[rng.gen_range(0..divs.len())]);
        let a = if rng.gen_bool(0.5) { d } else { -d };
        x[o1 + 1] = &c / &a;
        x[o1] = a;
    }
    for _ in 0..2 {
        let root = random_small_root(lat, rng, &hyp);
        x = Generator::Reflection { root }.apply(lat, &x);
    }
    Ok(lat.big_vector(&x)?)
}

fn random_small_root(lat: &Lattice, rng: &mut impl Rng, hyp: &[usize]) -> Vec<BigInt> {
    let n = lat.rank();
    let o = hyp[rng.gen_range(0..hyp.len())];
    let mut r = vec![BigInt::zero(); n];
    if rng.gen_bool(0.3) {
        // a definite basis vector of norm -2 if one exists, else f1 - f2
        let cands: Vec<usize> = (0..n).filter(|&i| lat.gram()[i][i] == -2).collect();
        if !cands.is_empty() {
            r[cands[rng.gen_range(0..cands.len())]] = BigInt::one();
            return r;
        }
    }
    // (mu, 1, (-mu^2 - 2)/2) in the plane at `o`
    for (i, c) in r.iter_mut().enumerate() {
        if i != o && i != o + 1 {
            *c = BigInt::from(rng.gen_range(-2i64..=2));
        }
    }
    let half = (lat.pair_int(&r, &r) + BigInt::from(2)) / BigInt::from(2);
    r[o] = BigInt::one();
    r[o + 1] = -half;
    r
}

/// A word of `len` small generators: reflections in basis roots and in
/// `f1 - f2`, unit transvections, and flips.
pub fn random_isometry(
    lat: &Lattice,
    rng: &mut impl Rng,
    len: usize,
) -> Result<IsometryWord, OrbitError> {
    let n = lat.rank();
    let hyp: Vec<(usize, usize)> = lat
        .blocks()
        .enumerate()
        .filter(|(_, (_, s))| *s == Summand::Hyperbolic)
        .map(|(i, (o, _))| (i, o))
        .collect();
    let roots: Vec<usize> = (0..n).filter(|&i| lat.gram()[i][i] == -2).collect();
    let unit = |i: usize, k: i64| {
        let mut e = vec![BigInt::zero(); n];
        e[i] = BigInt::from(k);
        e
    };
    let mut gens = Vec::with_capacity(len);
    while gens.len() < len {
        let g = match rng.gen_range(0..4) {
            0 if !roots.is_empty() => Generator::Reflection {
                root: unit(roots[rng.gen_range(0..roots.len())], 1),
            },
            1 if !hyp.is_empty() => {
                let (_, o) = hyp[rng.gen_range(0..hyp.len())];
                let mut r = unit(o, 1);
                r[o + 1] = BigInt::from(-1);
                Generator::Reflection { root: r }
            }
            2 if !hyp.is_empty() && n > 2 => {
                let (i, o) = hyp[rng.gen_range(0..hyp.len())];
                let j = loop {
                    let j = rng.gen_range(0..n);
                    if j != o && j != o + 1 {
                        break j;
                    }
                };
                let k = if rng.gen_bool(0.5) { 1 } else { -1 };
                Generator::Transvection {
                    lambda: unit(j, k),
                    split: i,
                }
            }
            3 if !hyp.is_empty() => {
                Generator::Block(BlockMove::Flip(hyp[rng.gen_range(0..hyp.len())].0))
            }
            _ => continue,
        };
        gens.push(g);
    }
    IsometryWord::new(lat, gens)
}

/// `<r, e>` for the last hyperbolic summand.
#[cfg(test)]
fn e_pairing(r: &LatticeVector) -> Option<i64> {
    use num_traits::ToPrimitive;
    let split = Split::last(r.lattice()).ok()?;
    r.coords()[split.off].to_integer().to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use crate::rational::rat_frac;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norm_shift_examples() {
        let u = make_lattice("U").unwrap();
        let v = u.vector(vec![rat_frac(1, 2), rat(0)]).unwrap();
        let mu = approximate_norm_shift(&v, &rat(0)).unwrap();
        assert_eq!(mu, u.zero());
        let w = u.int_vector(&[1, 2]).unwrap();
        assert_eq!(
            approximate_norm_shift(&w, &rat(0)).unwrap_err(),
            OrbitError::VectorInLattice
        );
    }

    #[test]
    fn norm_shift_agrees_with_exhaustive_oracle() {
        let u = make_lattice("U").unwrap();
        let v = u.vector(vec![rat_frac(1, 2), rat_frac(1, 3)]).unwrap();
        let x = rat(5);
        let gap = |a: i64, b: i64| {
            let d = v.add(&u.int_vector(&[-a, -b]).unwrap()).unwrap();
            (d.norm() - &x).abs()
        };
        let exists = (-20..=20).any(|a| (-20..=20).any(|b| gap(a, b) < rat(1)));
        assert!(exists);
        let mu = approximate_norm_shift(&v, &x).unwrap();
        let c = mu.to_i64().unwrap();
        assert!(gap(c[0], c[1]) < rat(1));
    }

    #[test]
    fn norm_shift_through_definite_coordinate() {
        let l = make_lattice("U+E8(-1)").unwrap();
        let mut c = vec![rat(0); 10];
        c[4] = rat_frac(1, 3);
        c[0] = rat(2);
        let v = l.vector(c).unwrap();
        let x = rat_frac(-7, 4);
        let mu = approximate_norm_shift(&v, &x).unwrap();
        let d = v.add(&mu.neg()).unwrap();
        assert!((d.norm() - x).abs() < rat(1));
    }

    #[test]
    fn gamma1_identity_and_errors() {
        let m = make_lattice("U^2").unwrap();
        let r = m.int_vector(&[1, -1, 0, 5]).unwrap();
        let cert = gamma1_reduce(&r).unwrap();
        assert!(cert.word.is_empty());
        assert_eq!(cert.output, r);
        let e = m.int_vector(&[0, 0, 0, 1]).unwrap();
        assert!(matches!(gamma1_reduce(&e), Err(OrbitError::NotRoot(_))));
    }

    #[test]
    fn gamma1_reaches_small_m() {
        let m = make_lattice("U^2+E8(-1)").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let r = random_root(&m, &mut rng, 50).unwrap();
            let cert = gamma1_reduce(&r).unwrap();
            assert!(cert.replays());
            let k = e_pairing(&cert.output).unwrap();
            assert!(k == 0 || k == 1, "m = {k}");
        }
    }

    #[test]
    fn canonical_root_has_identity_word() {
        let m = make_lattice("U^2+E8(-1)").unwrap();
        let mut c = vec![0i64; 12];
        c[0] = 1;
        c[1] = -1;
        let d = m.int_vector(&c).unwrap();
        let cert = canonicalize_root(&d).unwrap();
        assert!(cert.word.is_empty());
        assert_eq!(cert.output, d);
    }

    #[test]
    fn random_roots_canonicalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for label in ["U^2+E8(-1)", "U+E8(-1)", "U^3+E8(-1)^2", "U", "U^2"] {
            let m = make_lattice(label).unwrap();
            let mut want = vec![0i64; m.rank()];
            want[0] = 1;
            want[1] = -1;
            let want = m.int_vector(&want).unwrap();
            for _ in 0..30 {
                let r = random_root(&m, &mut rng, 30).unwrap();
                let cert = canonicalize_root(&r).unwrap_or_else(|e| panic!("{label}: {e}"));
                assert!(cert.replays());
                assert_eq!(cert.output, want);
            }
        }
    }

    #[test]
    fn canonicalize_errors() {
        let m = make_lattice("U^2").unwrap();
        let f1 = m.int_vector(&[1, 0, 0, 0]).unwrap();
        assert!(matches!(
            canonicalize_root(&f1),
            Err(OrbitError::NotRoot(_))
        ));
        let e8 = make_lattice("E8(-1)").unwrap();
        let mut c = vec![0i64; 8];
        c[0] = 1;
        assert!(matches!(
            canonicalize_root(&e8.int_vector(&c).unwrap()),
            Err(OrbitError::UnsupportedLattice(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let big = make_lattice("U^2+E8(-1)").unwrap();
        let r = loop {
            let r = random_root(&big, &mut rng, 1000).unwrap();
            if canonicalize_root(&r).unwrap().steps > 2 {
                break r;
            }
        };
        assert_eq!(
            canonicalize_root_with_budget(&r, 1).unwrap_err(),
            OrbitError::BudgetExceeded(1)
        );
    }
}
