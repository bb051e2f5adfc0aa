//! Even lattices assembled from hyperbolic planes `U`, copies of `E8(-1)` and
//! rank-one blocks `<-2n>`, with exact pairings, reflections, primitivity and
//! the orthogonal complement of a polarization.

mod descriptor;
mod enumerate;
pub(crate) mod fp;
pub mod linalg;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::rational::{from_int, rat, rational_to_json, rationals_from_json, Rational};

pub use descriptor::make_lattice;
pub use enumerate::{enumerate_roots, RootConstraint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("descriptor has no summands")]
    EmptyDescriptor,
    #[error("cannot parse descriptor {0:?}")]
    MalformedDescriptor(String),
    #[error("vectors belong to different lattices ({0} vs {1})")]
    LatticeMismatch(String, String),
    #[error("vector has norm {0}, expected -2")]
    NotRoot(String),
    #[error("{0}")]
    UnboundedConstraint(String),
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("vector has norm {0}, expected a positive norm")]
    NotPositiveNorm(String),
    #[error("vector is not of the form e1 + n e2 inside one hyperbolic summand")]
    NotInHyperbolicSummand,
    #[error("zero vector")]
    ZeroVector,
    #[error("expected {expected} coordinates, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("vector has non-integral coordinates")]
    NotIntegral,
    #[error("{0}")]
    InvalidConstraint(String),
    #[error("{0}")]
    BadJson(String),
}

impl LatticeError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyDescriptor => "EmptyDescriptor",
            Self::MalformedDescriptor(_) => "MalformedDescriptor",
            Self::LatticeMismatch(..) => "LatticeMismatch",
            Self::NotRoot(_) => "NotRoot",
            Self::UnboundedConstraint(_) => "UnboundedConstraint",
            Self::NotPrimitive => "NotPrimitive",
            Self::NotPositiveNorm(_) => "NotPositiveNorm",
            Self::NotInHyperbolicSummand => "NotInHyperbolicSummand",
            Self::ZeroVector => "ZeroVector",
            Self::WrongLength { .. } => "WrongLength",
            Self::NotIntegral => "NotIntegral",
            Self::InvalidConstraint(_) => "InvalidConstraint",
            Self::BadJson(_) => "BadJson",
        }
    }
}

/// One orthogonal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Summand {
    Hyperbolic,
    E8,
    /// `<d>` with `d = -2n < 0`.
    Rank1(i64),
}

/// E8 Dynkin diagram: a chain 0-1-2-3-4-5-6 with node 7 attached to node 4.
const E8_EDGES: [(usize, usize); 7] = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];

impl Summand {
    pub fn rank(&self) -> usize {
        match self {
            Self::Hyperbolic => 2,
            Self::E8 => 8,
            Self::Rank1(_) => 1,
        }
    }

    pub fn gram(&self) -> Vec<Vec<i64>> {
        match self {
            Self::Hyperbolic => vec![vec![0, 1], vec![1, 0]],
            Self::E8 => {
                let mut g = vec![vec![0i64; 8]; 8];
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = -2;
                }
                for &(a, b) in &E8_EDGES {
                    g[a][b] = 1;
                    g[b][a] = 1;
                }
                g
            }
            Self::Rank1(d) => vec![vec![*d]],
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Hyperbolic => "U".into(),
            Self::E8 => "E8(-1)".into(),
            Self::Rank1(d) => format!("<{d}>"),
        }
    }
}

struct LatticeData {
    label: String,
    summands: Vec<Summand>,
    offsets: Vec<usize>,
    gram: Vec<Vec<i64>>,
    sparse: Vec<Vec<(usize, i64)>>,
    signature: (usize, usize),
    det: BigInt,
}

/// An even lattice with a block-diagonal integer Gram matrix. Cheap to clone.
#[derive(Clone)]
pub struct Lattice(Arc<LatticeData>);

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.summands == other.0.summands
    }
}
impl Eq for Lattice {}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice({})", self.0.label)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label)
    }
}

fn render_label(summands: &[Summand]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < summands.len() {
        let mut j = i;
        while j < summands.len() && summands[j] == summands[i] {
            j += 1;
        }
        let base = summands[i].label();
        parts.push(if j - i == 1 {
            base
        } else {
            format!("{base}^{}", j - i)
        });
        i = j;
    }
    parts.join("+")
}

impl Lattice {
    pub fn from_summands(summands: Vec<Summand>) -> Result<Self, LatticeError> {
        if summands.is_empty() {
            return Err(LatticeError::EmptyDescriptor);
        }
        for s in &summands {
            if let Summand::Rank1(d) = s {
                if *d >= 0 || d % 2 != 0 {
                    return Err(LatticeError::MalformedDescriptor(s.label()));
                }
            }
        }
        let n: usize = summands.iter().map(Summand::rank).sum();
        let mut gram = vec![vec![0i64; n]; n];
        let mut offsets = Vec::with_capacity(summands.len());
        let mut at = 0;
        for s in &summands {
            offsets.push(at);
            for (i, row) in s.gram().iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    gram[at + i][at + j] = v;
                }
            }
            at += s.rank();
        }
        let sparse = gram
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        let (p, q, _) = linalg::inertia(&linalg::to_rational(&gram));
        let det = linalg::det_int(&gram);
        Ok(Self(Arc::new(LatticeData {
            label: render_label(&summands),
            summands,
            offsets,
            gram,
            sparse,
            signature: (p, q),
            det,
        })))
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn rank(&self) -> usize {
        self.0.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.0.gram
    }

    pub fn signature(&self) -> (usize, usize) {
        self.0.signature
    }

    pub fn det(&self) -> &BigInt {
        &self.0.det
    }

    pub fn summands(&self) -> &[Summand] {
        &self.0.summands
    }

    /// `(offset, summand)` for every block.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, Summand)> + '_ {
        self.0
            .offsets
            .iter()
            .copied()
            .zip(self.0.summands.iter().copied())
    }

    /// Offsets of the hyperbolic blocks.
    pub fn hyperbolic_offsets(&self) -> Vec<usize> {
        self.blocks()
            .filter(|(_, s)| *s == Summand::Hyperbolic)
            .map(|(o, _)| o)
            .collect()
    }

    pub fn is_unimodular(&self) -> bool {
        self.0.det.abs().is_one()
    }

    /// Gram matrix as whitespace-separated rows.
    pub fn gram_text(&self) -> String {
        self.0
            .gram
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn pair_int(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        let mut s = BigInt::zero();
        for (i, row) in self.0.sparse.iter().enumerate() {
            if a[i].is_zero() {
                continue;
            }
            let mut t = BigInt::zero();
            for &(j, g) in row {
                if !b[j].is_zero() {
                    t += &b[j] * g;
                }
            }
            s += &a[i] * t;
        }
        s
    }

    pub fn pair_i64(&self, a: &[i64], b: &[i64]) -> i128 {
        let mut s = 0i128;
        for (i, row) in self.0.sparse.iter().enumerate() {
            for &(j, g) in row {
                s += a[i] as i128 * g as i128 * b[j] as i128;
            }
        }
        s
    }

    pub fn pair_rat(&self, a: &[Rational], b: &[Rational]) -> Rational {
        let mut s = rat(0);
        for (i, row) in self.0.sparse.iter().enumerate() {
            if a[i].is_zero() {
                continue;
            }
            let mut t = rat(0);
            for &(j, g) in row {
                if !b[j].is_zero() {
                    t += &b[j] * rat(g);
                }
            }
            s += &a[i] * t;
        }
        s
    }

    /// `G * v` for an integral vector: the coefficients of `<v, .>`.
    pub fn dual_int(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.0
            .sparse
            .iter()
            .map(|row| row.iter().map(|&(j, g)| &v[j] * g).sum())
            .collect()
    }

    pub fn vector(&self, coords: Vec<Rational>) -> Result<LatticeVector, LatticeError> {
        if coords.len() != self.rank() {
            return Err(LatticeError::WrongLength {
                expected: self.rank(),
                got: coords.len(),
            });
        }
        Ok(LatticeVector {
            lattice: self.clone(),
            coords,
        })
    }

    pub fn int_vector(&self, coords: &[i64]) -> Result<LatticeVector, LatticeError> {
        self.vector(coords.iter().map(|&x| rat(x)).collect())
    }

    pub fn big_vector(&self, coords: &[BigInt]) -> Result<LatticeVector, LatticeError> {
        self.vector(coords.iter().map(from_int).collect())
    }

    pub fn zero(&self) -> LatticeVector {
        LatticeVector {
            lattice: self.clone(),
            coords: vec![rat(0); self.rank()],
        }
    }

    /// Basis vector `e_i`.
    pub fn basis(&self, i: usize) -> LatticeVector {
        let mut v = self.zero();
        v.coords[i] = rat(1);
        v
    }

    /// Direct sum with the summands of `other` appended.
    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let mut s = self.0.summands.clone();
        s.extend_from_slice(&other.0.summands);
        Lattice::from_summands(s).expect("sum of valid summands")
    }
}

/// Exact coordinates relative to the basis of an owning lattice.
#[derive(Clone, PartialEq, Eq)]
pub struct LatticeVector {
    lattice: Lattice,
    coords: Vec<Rational>,
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl LatticeVector {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn to_ints(&self) -> Option<Vec<BigInt>> {
        self.coords
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.coords
            .iter()
            .map(|c| {
                if c.is_integer() {
                    c.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn norm(&self) -> Rational {
        self.lattice.pair_rat(&self.coords, &self.coords)
    }

    pub fn scale(&self, k: &Rational) -> LatticeVector {
        LatticeVector {
            lattice: self.lattice.clone(),
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add(&self, other: &LatticeVector) -> Result<LatticeVector, LatticeError> {
        same_lattice(self, other)?;
        Ok(LatticeVector {
            lattice: self.lattice.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn neg(&self) -> LatticeVector {
        self.scale(&rat(-1))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lattice": self.lattice.label(),
            "coords": self.coords.iter().map(rational_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<LatticeVector, LatticeError> {
        let label = v
            .get("lattice")
            .and_then(Value::as_str)
            .ok_or_else(|| LatticeError::BadJson("missing \"lattice\"".into()))?;
        let coords = v
            .get("coords")
            .and_then(rationals_from_json)
            .ok_or_else(|| LatticeError::BadJson("bad \"coords\"".into()))?;
        make_lattice(label)?.vector(coords)
    }
}

fn same_lattice(v: &LatticeVector, w: &LatticeVector) -> Result<(), LatticeError> {
    if v.lattice != w.lattice {
        return Err(LatticeError::LatticeMismatch(
            v.lattice.label().into(),
            w.lattice.label().into(),
        ));
    }
    Ok(())
}

pub fn pair(v: &LatticeVector, w: &LatticeVector) -> Result<Rational, LatticeError> {
    same_lattice(v, w)?;
    Ok(v.lattice.pair_rat(&v.coords, &w.coords))
}

/// `v + <v, delta> delta` for a root `delta`.
pub fn reflect(delta: &LatticeVector, v: &LatticeVector) -> Result<LatticeVector, LatticeError> {
    same_lattice(delta, v)?;
    let n = delta.norm();
    if n != rat(-2) {
        return Err(LatticeError::NotRoot(crate::rational::format_rational(&n)));
    }
    let c = pair(v, delta)?;
    v.add(&delta.scale(&c))
}

pub fn is_primitive(v: &LatticeVector) -> Result<bool, LatticeError> {
    let ints = v.to_ints().ok_or(LatticeError::NotIntegral)?;
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(LatticeError::ZeroVector);
    }
    Ok(g.is_one())
}

/// The complement of a polarization `l = e1 + n e2` sitting in one hyperbolic
/// block: `<-2n> + (remaining blocks)`, generated by `l* = e1 - n e2`.
#[derive(Debug, Clone)]
pub struct Complement {
    pub lattice: Lattice,
    /// Row `i` is the image of basis vector `i` in the ambient coordinates.
    pub embedding: Vec<Vec<BigInt>>,
    pub generator: LatticeVector,
    /// Offset of the hyperbolic block holding `l`.
    pub block: usize,
    pub degree: i64,
}

impl Complement {
    pub fn embed(&self, v: &LatticeVector) -> Result<LatticeVector, LatticeError> {
        if v.lattice != self.lattice {
            return Err(LatticeError::LatticeMismatch(
                v.lattice.label().into(),
                self.lattice.label().into(),
            ));
        }
        let ambient = self.generator.lattice();
        let mut out = vec![rat(0); ambient.rank()];
        for (c, row) in v.coords.iter().zip(&self.embedding) {
            for (o, e) in out.iter_mut().zip(row) {
                *o += c * from_int(e);
            }
        }
        ambient.vector(out)
    }
}

pub fn orthogonal_complement(l: &LatticeVector) -> Result<Complement, LatticeError> {
    let ints = l.to_ints().ok_or(LatticeError::NotIntegral)?;
    if ints.iter().all(Zero::is_zero) {
        return Err(LatticeError::ZeroVector);
    }
    let norm = l.norm();
    if !norm.is_positive() {
        return Err(LatticeError::NotPositiveNorm(
            crate::rational::format_rational(&norm),
        ));
    }
    if !is_primitive(l)? {
        return Err(LatticeError::NotPrimitive);
    }
    let lat = l.lattice();
    let support: Vec<usize> = (0..ints.len()).filter(|&i| !ints[i].is_zero()).collect();
    let block = lat
        .hyperbolic_offsets()
        .into_iter()
        .find(|&o| support.iter().all(|&i| i == o || i == o + 1))
        .ok_or(LatticeError::NotInHyperbolicSummand)?;
    if !ints[block].is_one() {
        return Err(LatticeError::NotInHyperbolicSummand);
    }
    let n = ints[block + 1]
        .to_i64()
        .ok_or(LatticeError::NotInHyperbolicSummand)?;
    let mut summands = vec![Summand::Rank1(-2 * n)];
    let mut embedding = Vec::new();
    let mut gen = vec![BigInt::zero(); lat.rank()];
    gen[block] = BigInt::one();
    gen[block + 1] = BigInt::from(-n);
    embedding.push(gen.clone());
    for (o, s) in lat.blocks() {
        if o == block {
            continue;
        }
        summands.push(s);
        for i in 0..s.rank() {
            let mut row = vec![BigInt::zero(); lat.rank()];
            row[o + i] = BigInt::one();
            embedding.push(row);
        }
    }
    let sub = Lattice::from_summands(summands)?;
    Ok(Complement {
        lattice: sub,
        embedding,
        generator: lat.big_vector(&gen)?,
        block,
        degree: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Lattice {
        make_lattice("U^3+E8(-1)^2").unwrap()
    }

    #[test]
    fn e8_block_is_even_unimodular_negative_definite() {
        let e8 = make_lattice("E8(-1)").unwrap();
        assert_eq!(e8.det(), &BigInt::one());
        assert_eq!(e8.signature(), (0, 8));
    }

    #[test]
    fn k3_lattice_invariants() {
        let l = k3();
        assert_eq!(l.rank(), 22);
        assert_eq!(l.signature(), (3, 19));
        assert_eq!(l.det(), &BigInt::from(-1));
        assert!(l.gram().iter().enumerate().all(|(i, r)| r[i] % 2 == 0));
    }

    #[test]
    fn hyperbolic_plane() {
        let u = make_lattice("U").unwrap();
        assert_eq!(u.gram(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(u.signature(), (1, 1));
        let a = u.int_vector(&[1, 0]).unwrap();
        let b = u.int_vector(&[0, 1]).unwrap();
        assert_eq!(pair(&a, &b).unwrap(), rat(1));
        assert_eq!(pair(&a, &u.zero()).unwrap(), rat(0));
        let d = u.int_vector(&[1, -1]).unwrap();
        assert_eq!(pair(&d, &d).unwrap(), rat(-2));
    }

    #[test]
    fn reflection_examples() {
        let u = make_lattice("U").unwrap();
        let d = u.int_vector(&[1, -1]).unwrap();
        let v = u.int_vector(&[1, 0]).unwrap();
        assert_eq!(reflect(&d, &v).unwrap(), u.int_vector(&[0, 1]).unwrap());
        assert_eq!(reflect(&d, &d).unwrap(), d.neg());
        let w = u.int_vector(&[1, 1]).unwrap();
        assert_eq!(reflect(&d, &w).unwrap(), w);
        assert!(matches!(reflect(&v, &d), Err(LatticeError::NotRoot(_))));
    }

    #[test]
    fn mismatch_detected() {
        let u = make_lattice("U").unwrap();
        let e = make_lattice("<-2>+<-2>").unwrap();
        let a = u.int_vector(&[1, 0]).unwrap();
        let b = e.int_vector(&[1, 0]).unwrap();
        assert!(matches!(
            pair(&a, &b),
            Err(LatticeError::LatticeMismatch(..))
        ));
    }

    #[test]
    fn primitivity() {
        let u = make_lattice("U").unwrap();
        assert!(is_primitive(&u.int_vector(&[1, 0]).unwrap()).unwrap());
        assert!(!is_primitive(&u.int_vector(&[2, 4]).unwrap()).unwrap());
        assert_eq!(
            is_primitive(&u.int_vector(&[0, 0]).unwrap()),
            Err(LatticeError::ZeroVector)
        );
    }

    #[test]
    fn polarization_complement() {
        let l = k3();
        let mut c = vec![0i64; 22];
        c[0] = 1;
        c[1] = 2;
        let pol = l.int_vector(&c).unwrap();
        let comp = orthogonal_complement(&pol).unwrap();
        assert_eq!(comp.generator.norm(), rat(-4));
        assert_eq!(comp.lattice.label(), "<-4>+U^2+E8(-1)^2");
        assert_eq!(comp.lattice.signature(), (2, 19));
        for i in 0..comp.lattice.rank() {
            let img = comp.embed(&comp.lattice.basis(i)).unwrap();
            assert_eq!(pair(&img, &pol).unwrap(), rat(0));
        }
        // the embedding is an isometry onto its image
        for i in 0..comp.lattice.rank() {
            for j in 0..comp.lattice.rank() {
                let a = comp.embed(&comp.lattice.basis(i)).unwrap();
                let b = comp.embed(&comp.lattice.basis(j)).unwrap();
                assert_eq!(pair(&a, &b).unwrap(), rat(comp.lattice.gram()[i][j]));
            }
        }
    }

    #[test]
    fn complement_errors() {
        let l = k3();
        let mut c = vec![0i64; 22];
        c[0] = 1;
        assert!(matches!(
            orthogonal_complement(&l.int_vector(&c).unwrap()),
            Err(LatticeError::NotPositiveNorm(_))
        ));
        c[0] = 2;
        c[1] = 2;
        assert_eq!(
            orthogonal_complement(&l.int_vector(&c).unwrap()).unwrap_err(),
            LatticeError::NotPrimitive
        );
        c[0] = 1;
        c[1] = 1;
        c[2] = 1;
        assert_eq!(
            orthogonal_complement(&l.int_vector(&c).unwrap()).unwrap_err(),
            LatticeError::NotInHyperbolicSummand
        );
    }

    #[test]
    fn json_round_trip() {
        let l = make_lattice("U+<-4>").unwrap();
        let v = l
            .vector(vec![rat(3), crate::rational::rat_frac(-1, 2), rat(0)])
            .unwrap();
        let j = v.to_json();
        assert_eq!(
            j.to_string(),
            r#"{"coords":[3,"-1/2",0],"lattice":"U+<-4>"}"#
        );
        assert_eq!(LatticeVector::from_json(&j).unwrap(), v);
    }
}
