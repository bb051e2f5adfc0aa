//! Isometry words, reduction certificates, and the constructive root-orbit
//! reductions on lattices `M = L + U`.
//!
//! Coordinates relative to a chosen hyperbolic block `U = <f1, f2>` are written
//! `(v, m, n)` meaning `v + m f1 + n f2`, so `<x, f2> = m`.

mod discriminant;
mod reduce;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Num, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError, LatticeVector, Summand};
use crate::rational::{from_int, rational_to_json, rationals_from_json, Rational};

pub use discriminant::{discriminant_component, ComponentTag, DiscriminantReport};
pub use reduce::{
    approximate_norm_shift, canonicalize_root, canonicalize_root_with_budget, gamma1_reduce,
    random_isometry, random_root, DEFAULT_BUDGET,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("vector has norm {0}, expected -2")]
    NotRoot(String),
    #[error("vector has non-integral coordinates")]
    NotIntegral,
    #[error("vector already lies in the lattice")]
    VectorInLattice,
    #[error("no hyperbolic pair with non-integral pairing is available")]
    NoUsableIsotropic,
    #[error("lattice {0} has no hyperbolic summand")]
    UnsupportedLattice(String),
    #[error("step budget of {0} exhausted")]
    BudgetExceeded(usize),
    #[error("reduction step failed to decrease |<r,e>| ({from} -> {to})")]
    Stalled { from: String, to: String },
    #[error("{0}")]
    BadPolarization(String),
    #[error("pairing <delta,l> = {pairing} admits no l*-normal form for degree {degree}")]
    LstarUnreachable { pairing: String, degree: i64 },
    #[error("{0}")]
    BadGenerator(String),
    #[error("{0}")]
    BadJson(String),
}

impl OrbitError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Lattice(e) => e.code(),
            Self::NotRoot(_) => "NotRoot",
            Self::NotIntegral => "NotIntegral",
            Self::VectorInLattice => "VectorInLattice",
            Self::NoUsableIsotropic => "NoUsableIsotropic",
            Self::UnsupportedLattice(_) => "UnsupportedLattice",
            Self::BudgetExceeded(_) => "BudgetExceeded",
            Self::Stalled { .. } => "Stalled",
            Self::BadPolarization(_) => "BadPolarization",
            Self::LstarUnreachable { .. } => "LstarUnreachable",
            Self::BadGenerator(_) => "BadGenerator",
            Self::BadJson(_) => "BadJson",
        }
    }
}

/// Named automorphisms permuting whole blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockMove {
    /// Exchange two identical summands (indices into the summand list).
    Swap(usize, usize),
    /// `f1 <-> f2` inside one hyperbolic summand.
    Flip(usize),
}

impl fmt::Display for BlockMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Swap(i, j) => write!(f, "swap:{i}:{j}"),
            Self::Flip(i) => write!(f, "flip:{i}"),
        }
    }
}

impl BlockMove {
    pub fn parse(name: &str) -> Option<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        match parts.as_slice() {
            ["swap", i, j] => Some(Self::Swap(i.parse().ok()?, j.parse().ok()?)),
            ["flip", i] => Some(Self::Flip(i.parse().ok()?)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    Reflection {
        root: Vec<BigInt>,
    },
    /// Eichler transvection attached to `lambda`, using summand `split` as the
    /// `(m, n)` plane; `lambda` vanishes on that summand.
    Transvection {
        lambda: Vec<BigInt>,
        split: usize,
    },
    SignFlip,
    Block(BlockMove),
}

/// Ring operations needed to replay a word on integer or rational coordinates.
pub trait Scalar: Clone + Num + std::ops::Neg<Output = Self> + From<BigInt> {}
impl<T: Clone + Num + std::ops::Neg<Output = T> + From<BigInt>> Scalar for T {}

fn pair_with<T: Scalar>(lat: &Lattice, x: &[T], y: &[BigInt]) -> T {
    let gy = lat.dual_int(y);
    x.iter()
        .zip(&gy)
        .filter(|(_, g)| !g.is_zero())
        .fold(T::zero(), |acc, (a, g)| {
            acc + a.clone() * T::from(g.clone())
        })
}

fn split_offset(lat: &Lattice, split: usize) -> Result<usize, OrbitError> {
    match lat.blocks().nth(split) {
        Some((o, Summand::Hyperbolic)) => Ok(o),
        _ => Err(OrbitError::BadGenerator(format!(
            "summand {split} of {lat} is not a hyperbolic plane"
        ))),
    }
}

/// `(v, m, n) -> (v + m lambda, m, n - <v,lambda> - m <lambda,lambda>/2)`.
pub fn apply_transvection<T: Scalar>(
    lat: &Lattice,
    lambda: &[BigInt],
    split: usize,
    x: &[T],
) -> Result<Vec<T>, OrbitError> {
    let o = split_offset(lat, split)?;
    if !lambda[o].is_zero() || !lambda[o + 1].is_zero() {
        return Err(OrbitError::BadGenerator(
            "transvection vector meets its split plane".into(),
        ));
    }
    let m = x[o].clone();
    let mut v = x.to_vec();
    v[o] = T::zero();
    v[o + 1] = T::zero();
    let half = lat.pair_int(lambda, lambda).div_floor(&BigInt::from(2));
    let vl = pair_with(lat, &v, lambda);
    let mut out: Vec<T> = x
        .iter()
        .zip(lambda)
        .map(|(a, l)| a.clone() + m.clone() * T::from(l.clone()))
        .collect();
    out[o] = m.clone();
    out[o + 1] = x[o + 1].clone() - vl - m * T::from(half);
    Ok(out)
}

/// The variant `(v + 2m lambda, m, n - <v,lambda> - m <lambda,lambda>)`. It is
/// not an isometry; kept so the isometry gate can show it failing.
pub fn apply_literal_transvection<T: Scalar>(
    lat: &Lattice,
    lambda: &[BigInt],
    split: usize,
    x: &[T],
) -> Result<Vec<T>, OrbitError> {
    let o = split_offset(lat, split)?;
    let m = x[o].clone();
    let mut v = x.to_vec();
    v[o] = T::zero();
    v[o + 1] = T::zero();
    let ll = lat.pair_int(lambda, lambda);
    let vl = pair_with(lat, &v, lambda);
    let two = T::from(BigInt::from(2));
    let mut out: Vec<T> = x
        .iter()
        .zip(lambda)
        .map(|(a, l)| a.clone() + two.clone() * m.clone() * T::from(l.clone()))
        .collect();
    out[o] = m.clone();
    out[o + 1] = x[o + 1].clone() - vl - m * T::from(ll);
    Ok(out)
}

impl Generator {
    pub fn validate(&self, lat: &Lattice) -> Result<(), OrbitError> {
        let len_ok = |v: &[BigInt]| v.len() == lat.rank();
        match self {
            Self::Reflection { root } => {
                if !len_ok(root) {
                    return Err(OrbitError::BadGenerator("root has wrong length".into()));
                }
                let n = lat.pair_int(root, root);
                if n != BigInt::from(-2) {
                    return Err(OrbitError::NotRoot(n.to_string()));
                }
            }
            Self::Transvection { lambda, split } => {
                if !len_ok(lambda) {
                    return Err(OrbitError::BadGenerator("lambda has wrong length".into()));
                }
                let o = split_offset(lat, *split)?;
                if !lambda[o].is_zero() || !lambda[o + 1].is_zero() {
                    return Err(OrbitError::BadGenerator(
                        "transvection vector meets its split plane".into(),
                    ));
                }
            }
            Self::SignFlip => {}
            Self::Block(BlockMove::Swap(i, j)) => {
                let s = lat.summands();
                if *i >= s.len() || *j >= s.len() || s[*i] != s[*j] {
                    return Err(OrbitError::BadGenerator(format!(
                        "cannot swap summands {i} and {j} of {lat}"
                    )));
                }
            }
            Self::Block(BlockMove::Flip(i)) => {
                split_offset(lat, *i)?;
            }
        }
        Ok(())
    }

    /// Image of `x`; the generator must already be valid for `lat`.
    pub fn apply<T: Scalar>(&self, lat: &Lattice, x: &[T]) -> Vec<T> {
        match self {
            Self::Reflection { root } => {
                let c = pair_with(lat, x, root);
                x.iter()
                    .zip(root)
                    .map(|(a, r)| a.clone() + c.clone() * T::from(r.clone()))
                    .collect()
            }
            Self::Transvection { lambda, split } => {
                apply_transvection(lat, lambda, *split, x).expect("validated generator")
            }
            Self::SignFlip => x.iter().map(|a| -a.clone()).collect(),
            Self::Block(BlockMove::Swap(i, j)) => {
                let offs: Vec<(usize, Summand)> = lat.blocks().collect();
                let (oi, s) = offs[*i];
                let (oj, _) = offs[*j];
                let mut out = x.to_vec();
                for k in 0..s.rank() {
                    out.swap(oi + k, oj + k);
                }
                out
            }
            Self::Block(BlockMove::Flip(i)) => {
                let (o, _) = lat.blocks().nth(*i).expect("validated generator");
                let mut out = x.to_vec();
                out.swap(o, o + 1);
                out
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let ints = |v: &[BigInt]| {
            v.iter()
                .map(|c| rational_to_json(&from_int(c)))
                .collect::<Vec<_>>()
        };
        match self {
            Self::Reflection { root } => json!({"kind": "reflection", "root": ints(root)}),
            Self::Transvection { lambda, split } => {
                json!({"kind": "transvection", "lambda": ints(lambda), "split": split})
            }
            Self::SignFlip => json!({"kind": "sign-flip"}),
            Self::Block(b) => json!({"kind": "block", "name": b.to_string()}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, OrbitError> {
        let bad = |m: &str| OrbitError::BadJson(m.to_string());
        let ints = |key: &str| -> Result<Vec<BigInt>, OrbitError> {
            let r = v
                .get(key)
                .and_then(rationals_from_json)
                .ok_or_else(|| bad(&format!("bad \"{key}\"")))?;
            r.iter()
                .map(|c| c.is_integer().then(|| c.to_integer()))
                .collect::<Option<Vec<_>>>()
                .ok_or(OrbitError::NotIntegral)
        };
        match v.get("kind").and_then(Value::as_str) {
            Some("reflection") => Ok(Self::Reflection {
                root: ints("root")?,
            }),
            Some("transvection") => Ok(Self::Transvection {
                lambda: ints("lambda")?,
                split: v
                    .get("split")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| bad("bad \"split\""))? as usize,
            }),
            Some("sign-flip") => Ok(Self::SignFlip),
            Some("block") => {
                let name = v
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("bad \"name\""))?;
                BlockMove::parse(name)
                    .map(Self::Block)
                    .ok_or_else(|| bad(&format!("unknown block move {name:?}")))
            }
            _ => Err(bad("unknown generator kind")),
        }
    }
}

/// Generators applied left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryWord {
    lattice: Lattice,
    generators: Vec<Generator>,
}

impl IsometryWord {
    pub fn identity(lattice: &Lattice) -> Self {
        Self {
            lattice: lattice.clone(),
            generators: Vec::new(),
        }
    }

    pub fn new(lattice: &Lattice, generators: Vec<Generator>) -> Result<Self, OrbitError> {
        for g in &generators {
            g.validate(lattice)?;
        }
        Ok(Self {
            lattice: lattice.clone(),
            generators,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn push(&mut self, g: Generator) -> Result<(), OrbitError> {
        g.validate(&self.lattice)?;
        self.generators.push(g);
        Ok(())
    }

    pub fn then(&self, other: &IsometryWord) -> IsometryWord {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Self {
            lattice: self.lattice.clone(),
            generators: g,
        }
    }

    pub fn apply_coords<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.generators
            .iter()
            .fold(x.to_vec(), |acc, g| g.apply(&self.lattice, &acc))
    }

    pub fn apply(&self, x: &LatticeVector) -> Result<LatticeVector, OrbitError> {
        if x.lattice() != &self.lattice {
            return Err(LatticeError::LatticeMismatch(
                x.lattice().label().into(),
                self.lattice.label().into(),
            )
            .into());
        }
        let out: Vec<Rational> = self.apply_coords(x.coords());
        Ok(self.lattice.vector(out)?)
    }

    /// Row `i` is the image of basis vector `e_i`, so `x -> x * matrix`.
    pub fn matrix(&self) -> Vec<Vec<BigInt>> {
        (0..self.lattice.rank())
            .map(|i| {
                let mut e = vec![BigInt::zero(); self.lattice.rank()];
                e[i] = BigInt::from(1);
                self.apply_coords(&e)
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.generators.iter().map(Generator::to_json).collect())
    }

    pub fn from_json(lattice: &Lattice, v: &Value) -> Result<Self, OrbitError> {
        let arr = v
            .as_array()
            .ok_or_else(|| OrbitError::BadJson("word must be an array".into()))?;
        let gens = arr
            .iter()
            .map(Generator::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(lattice, gens)
    }
}

/// Exact record that `word` carries `input` to `output`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionCertificate {
    pub input: LatticeVector,
    pub word: IsometryWord,
    pub output: LatticeVector,
    pub steps: usize,
}

impl ReductionCertificate {
    pub fn replays(&self) -> bool {
        self.word
            .apply(&self.input)
            .map(|o| o == self.output)
            .unwrap_or(false)
            && self.input.norm() == self.output.norm()
    }

    pub fn to_json(&self) -> Value {
        let coords =
            |v: &LatticeVector| v.coords().iter().map(rational_to_json).collect::<Vec<_>>();
        json!({
            "lattice": self.input.lattice().label(),
            "input": coords(&self.input),
            "word": self.word.to_json(),
            "output": coords(&self.output),
            "steps": self.steps,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, OrbitError> {
        let bad = |m: &str| OrbitError::BadJson(m.to_string());
        let label = v
            .get("lattice")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing \"lattice\""))?;
        let lat = crate::lattice::make_lattice(label)?;
        let vec_of = |key: &str| -> Result<LatticeVector, OrbitError> {
            let c = v
                .get(key)
                .and_then(rationals_from_json)
                .ok_or_else(|| bad(&format!("bad \"{key}\"")))?;
            Ok(lat.vector(c)?)
        };
        let word =
            IsometryWord::from_json(&lat, v.get("word").ok_or_else(|| bad("missing \"word\""))?)?;
        Ok(Self {
            input: vec_of("input")?,
            output: vec_of("output")?,
            steps: v
                .get("steps")
                .and_then(Value::as_u64)
                .map(|s| s as usize)
                .unwrap_or(word.len()),
            word,
        })
    }
}

/// Integer coordinates of an integral vector, or `NotIntegral`.
pub(crate) fn int_coords(v: &LatticeVector) -> Result<Vec<BigInt>, OrbitError> {
    v.to_ints().ok_or(OrbitError::NotIntegral)
}

pub(crate) fn require_root(v: &LatticeVector) -> Result<Vec<BigInt>, OrbitError> {
    let x = int_coords(v)?;
    let n = v.lattice().pair_int(&x, &x);
    if n != BigInt::from(-2) {
        return Err(OrbitError::NotRoot(n.to_string()));
    }
    Ok(x)
}
