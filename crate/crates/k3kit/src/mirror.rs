//! B-field extension, the positive four-plane of a marked pair, and the
//! Picard/transcendental exchange through a hyperbolic block.
//!
//! The extended lattice is `L + U0`, with `U0` in the last two coordinates.

use num_complex::Complex;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::linalg::{det_rat, is_positive_definite};
use crate::lattice::{make_lattice, Lattice, LatticeError, Summand};
use crate::rational::{rat, Rational};

pub type ComplexCoords = Vec<Complex<Rational>>;

pub const K3_DESCRIPTOR: &str = "U^3+E8(-1)^2";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MirrorError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("imaginary part has norm {0}, which is not positive")]
    NotBField(String),
    #[error("period violates the Riemann relations: {0}")]
    RiemannRelationViolated(String),
    #[error("four-plane Gram is not positive definite (determinant {0})")]
    NotPositiveFourPlane(String),
    #[error("{0}")]
    NoHyperbolicSummand(String),
    #[error("{0}")]
    BadMarking(String),
    #[error("{0}")]
    BadJson(String),
}

impl MirrorError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Lattice(e) => e.code(),
            Self::NotBField(_) => "NotBField",
            Self::RiemannRelationViolated(_) => "RiemannRelationViolated",
            Self::NotPositiveFourPlane(_) => "NotPositiveFourPlane",
            Self::NoHyperbolicSummand(_) => "NoHyperbolicSummand",
            Self::BadMarking(_) => "BadMarking",
            Self::BadJson(_) => "BadJson",
        }
    }
}

/// Complex bilinear form, coordinates split into real and imaginary parts.
pub fn complex_pair(
    lat: &Lattice,
    a: &[Complex<Rational>],
    b: &[Complex<Rational>],
) -> Complex<Rational> {
    let re = |v: &[Complex<Rational>]| v.iter().map(|z| z.re.clone()).collect::<Vec<_>>();
    let im = |v: &[Complex<Rational>]| v.iter().map(|z| z.im.clone()).collect::<Vec<_>>();
    let (ar, ai, br, bi) = (re(a), im(a), re(b), im(b));
    Complex::new(
        lat.pair_rat(&ar, &br) - lat.pair_rat(&ai, &bi),
        lat.pair_rat(&ar, &bi) + lat.pair_rat(&ai, &br),
    )
}

fn conj(v: &[Complex<Rational>]) -> ComplexCoords {
    v.iter().map(|z| z.conj()).collect()
}

#[derive(Debug, Clone)]
pub struct BField {
    lattice: Lattice,
    coords: ComplexCoords,
}

impl BField {
    pub fn new(lattice: &Lattice, coords: ComplexCoords) -> Result<Self, MirrorError> {
        if coords.len() != lattice.rank() {
            return Err(LatticeError::WrongLength {
                expected: lattice.rank(),
                got: coords.len(),
            }
            .into());
        }
        let im: Vec<Rational> = coords.iter().map(|z| z.im.clone()).collect();
        let n = lattice.pair_rat(&im, &im);
        if !n.is_positive() {
            return Err(MirrorError::NotBField(n.to_string()));
        }
        Ok(Self {
            lattice: lattice.clone(),
            coords,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn coords(&self) -> &[Complex<Rational>] {
        &self.coords
    }
}

/// `L + U0`.
pub fn extended_lattice(lat: &Lattice) -> Lattice {
    lat.direct_sum(&make_lattice("U").expect("U parses"))
}

/// `V = (b, 1, -<b,b>/2)`.
pub fn extend_bfield(b: &BField) -> ComplexCoords {
    let bb = complex_pair(&b.lattice, &b.coords, &b.coords);
    let mut v = b.coords.clone();
    v.push(Complex::new(rat(1), rat(0)));
    v.push(Complex::new(-bb.re / rat(2), -bb.im / rat(2)));
    v
}

#[derive(Debug, Clone)]
pub struct FourPlane {
    /// Rows `Re Omega, Im Omega, Re V, Im V` in extended coordinates.
    pub basis: Vec<Vec<Rational>>,
    pub gram: Vec<Vec<Rational>>,
    /// Whether `Omega` is orthogonal to both `V` and its conjugate.
    pub orthogonal: bool,
}

pub fn four_plane(omega: &[Complex<Rational>], b: &BField) -> Result<FourPlane, MirrorError> {
    let lat = &b.lattice;
    if omega.len() != lat.rank() {
        return Err(LatticeError::WrongLength {
            expected: lat.rank(),
            got: omega.len(),
        }
        .into());
    }
    let oo = complex_pair(lat, omega, omega);
    if !oo.is_zero() {
        return Err(MirrorError::RiemannRelationViolated(format!(
            "<w,w> = {} + {}i",
            oo.re, oo.im
        )));
    }
    let ob = complex_pair(lat, omega, &conj(omega));
    if !ob.re.is_positive() {
        return Err(MirrorError::RiemannRelationViolated(format!(
            "<w,conj w> = {}",
            ob.re
        )));
    }
    let ext = extended_lattice(lat);
    let mut big_omega = omega.to_vec();
    big_omega.extend([Complex::zero(), Complex::zero()]);
    let v = extend_bfield(b);
    let orthogonal = complex_pair(&ext, &big_omega, &v).is_zero()
        && complex_pair(&ext, &big_omega, &conj(&v)).is_zero();
    let basis: Vec<Vec<Rational>> = vec![
        big_omega.iter().map(|z| z.re.clone()).collect(),
        big_omega.iter().map(|z| z.im.clone()).collect(),
        v.iter().map(|z| z.re.clone()).collect(),
        v.iter().map(|z| z.im.clone()).collect(),
    ];
    let gram: Vec<Vec<Rational>> = basis
        .iter()
        .map(|x| basis.iter().map(|y| ext.pair_rat(x, y)).collect())
        .collect();
    if !is_positive_definite(&gram) {
        return Err(MirrorError::NotPositiveFourPlane(
            det_rat(&gram).to_string(),
        ));
    }
    Ok(FourPlane {
        basis,
        gram,
        orthogonal,
    })
}

/// A block decomposition of an ambient lattice into Picard blocks `M` and
/// transcendental blocks `T`, with a hyperbolic block of `T` marked for the
/// exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPair {
    ambient: Lattice,
    picard: Vec<usize>,
    transcendental: Vec<usize>,
    u_choice: usize,
}

impl MarkedPair {
    pub fn new(
        ambient: &Lattice,
        picard: Vec<usize>,
        u_choice: usize,
    ) -> Result<Self, MirrorError> {
        let blocks = ambient.summands().len();
        let mut sorted = picard.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != picard.len() || sorted.iter().any(|&i| i >= blocks) {
            return Err(MirrorError::BadMarking(format!(
                "picard blocks must be distinct indices below {blocks}"
            )));
        }
        let transcendental: Vec<usize> = (0..blocks).filter(|i| !sorted.contains(i)).collect();
        if !transcendental.contains(&u_choice) {
            return Err(MirrorError::NoHyperbolicSummand(format!(
                "block {u_choice} is not a transcendental block"
            )));
        }
        if ambient.summands()[u_choice] != Summand::Hyperbolic {
            return Err(MirrorError::NoHyperbolicSummand(format!(
                "block {u_choice} is {}, not U",
                ambient.summands()[u_choice].label()
            )));
        }
        Ok(Self {
            ambient: ambient.clone(),
            picard: sorted,
            transcendental,
            u_choice,
        })
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn picard_blocks(&self) -> &[usize] {
        &self.picard
    }

    pub fn transcendental_blocks(&self) -> &[usize] {
        &self.transcendental
    }

    pub fn u_choice(&self) -> usize {
        self.u_choice
    }

    fn sub(&self, idx: &[usize]) -> Option<Lattice> {
        let s: Vec<Summand> = idx.iter().map(|&i| self.ambient.summands()[i]).collect();
        Lattice::from_summands(s).ok()
    }

    /// `None` when there are no Picard blocks.
    pub fn picard(&self) -> Option<Lattice> {
        self.sub(&self.picard)
    }

    pub fn transcendental(&self) -> Lattice {
        self.sub(&self.transcendental)
            .expect("T contains the marked U")
    }

    pub fn picard_rank(&self) -> usize {
        self.picard
            .iter()
            .map(|&i| self.ambient.summands()[i].rank())
            .sum()
    }

    /// Basis rows of the given blocks in ambient coordinates.
    pub fn embedding(&self, idx: &[usize]) -> Vec<Vec<i64>> {
        let offsets: Vec<(usize, Summand)> = self.ambient.blocks().collect();
        let n = self.ambient.rank();
        let mut rows = Vec::new();
        for &i in idx {
            let (o, s) = offsets[i];
            for k in 0..s.rank() {
                let mut r = vec![0; n];
                r[o + k] = 1;
                rows.push(r);
            }
        }
        rows
    }

    /// Exact check that every Picard row pairs to zero with every
    /// transcendental row.
    pub fn is_orthogonal(&self) -> bool {
        let m = self.embedding(&self.picard);
        let t = self.embedding(&self.transcendental);
        m.iter()
            .all(|a| t.iter().all(|b| self.ambient.pair_i64(a, b) == 0))
    }

    /// `sig(M) + sig(T)`.
    pub fn total_signature(&self) -> (usize, usize) {
        let (a, b) = self.picard().map(|l| l.signature()).unwrap_or((0, 0));
        let (c, d) = self.transcendental().signature();
        (a + c, b + d)
    }

    /// Gram matrices of the Picard blocks, sorted.
    pub fn picard_grams(&self) -> Vec<Vec<Vec<i64>>> {
        grams(&self.ambient, &self.picard)
    }

    pub fn transcendental_grams(&self) -> Vec<Vec<Vec<i64>>> {
        grams(&self.ambient, &self.transcendental)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ambient": self.ambient.label(),
            "picard": self.picard,
            "picard_lattice": self.picard().map(|l| l.label().to_string()),
            "transcendental": self.transcendental,
            "transcendental_lattice": self.transcendental().label(),
            "u_choice": self.u_choice,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, MirrorError> {
        let bad = |m: &str| MirrorError::BadJson(m.to_string());
        let ambient = make_lattice(
            v["ambient"]
                .as_str()
                .ok_or_else(|| bad("missing ambient"))?,
        )?;
        let picard = v["picard"]
            .as_array()
            .ok_or_else(|| bad("missing picard"))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|i| i as usize)
                    .ok_or_else(|| bad("bad block index"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let u = v["u_choice"]
            .as_u64()
            .ok_or_else(|| bad("missing u_choice"))? as usize;
        Self::new(&ambient, picard, u)
    }
}

fn grams(lat: &Lattice, idx: &[usize]) -> Vec<Vec<Vec<i64>>> {
    let mut g: Vec<_> = idx.iter().map(|&i| lat.summands()[i].gram()).collect();
    g.sort();
    g
}

/// `M1 = U^perp in T`, `T1 = M + U`, with the same `U` block carried along.
pub fn mirror_swap(data: &MarkedPair) -> MarkedPair {
    let picard: Vec<usize> = data
        .transcendental
        .iter()
        .copied()
        .filter(|&i| i != data.u_choice)
        .collect();
    MarkedPair::new(&data.ambient, picard, data.u_choice).expect("marked U stays transcendental")
}

/// The test family: `M = U`, `U + E8(-1)`, `U + E8(-1)^2` inside the K3
/// lattice, with the last `U` marked.
pub fn standard_family() -> Vec<MarkedPair> {
    let k3 = make_lattice(K3_DESCRIPTOR).expect("K3 lattice parses");
    [vec![0], vec![0, 3], vec![0, 3, 4]]
        .into_iter()
        .map(|m| MarkedPair::new(&k3, m, 2).expect("valid marking"))
        .collect()
}
