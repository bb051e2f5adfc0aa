//! Flat coordinates on the domain of positive `p`-planes in `R^{p,q}`.
//!
//! A point is a real `p x q` matrix `tau`; the plane is spanned by the rows of
//! `[I_p | tau]` in an orthonormal frame with form `J = diag(I_p, -I_q)`.
//! Isometries act on row vectors, `x -> x gamma`.

mod frame;
mod split;
mod tube;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use thiserror::Error;

use crate::lattice::LatticeError;

pub use frame::{factor_of_automorphy, Frame};
pub use split::{compose_h, split_h, HSplit};
pub use tube::{hermitian_pairing, tube_embed, ComplexVector, TubeForm};

/// Smallest eigenvalue accepted as positive.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("plane is not positive (smallest Gram eigenvalue {0:e})")]
    NotPositivePlane(f64),
    #[error("spanning rows have rank {rank} < {p}")]
    DegeneratePlane { rank: usize, p: usize },
    #[error("matrix does not preserve the form")]
    NotIsometry,
    #[error("imaginary part is not in the positive cone")]
    ImaginaryPartNotInCone,
    #[error("need p >= 3 and q >= 2, got ({p}, {q})")]
    HypothesisViolated { p: usize, q: usize },
    #[error("vectors are not an isotropic pair with pairing 1")]
    PairNotHyperbolic,
    #[error("{0}")]
    DimensionMismatch(String),
    #[error("form has signature ({0}, {1}), expected (1, k)")]
    NotLorentzian(usize, usize),
}

impl PeriodError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Lattice(e) => e.code(),
            Self::NotPositivePlane(_) => "NotPositivePlane",
            Self::DegeneratePlane { .. } => "DegeneratePlane",
            Self::NotIsometry => "NotIsometry",
            Self::ImaginaryPartNotInCone => "ImaginaryPartNotInCone",
            Self::HypothesisViolated { .. } => "HypothesisViolated",
            Self::PairNotHyperbolic => "PairNotHyperbolic",
            Self::DimensionMismatch(_) => "DimensionMismatch",
            Self::NotLorentzian(..) => "NotLorentzian",
        }
    }
}

/// `diag(I_p, -I_q)`.
pub fn form_j(p: usize, q: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p + q, p + q, |i, j| match (i == j, i < p) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    })
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPoint {
    tau: DMatrix<f64>,
}

impl PeriodPoint {
    pub fn new(tau: DMatrix<f64>) -> Result<Self, PeriodError> {
        let pt = Self { tau };
        let ev = min_eigenvalue(&pt.plane_gram());
        if !(ev > POSITIVITY_TOL) {
            return Err(PeriodError::NotPositivePlane(ev));
        }
        Ok(pt)
    }

    pub fn base(p: usize, q: usize) -> Self {
        Self {
            tau: DMatrix::zeros(p, q),
        }
    }

    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.tau.nrows(), self.tau.ncols())
    }

    /// Rows `g_j = e_j + sum_i tau_ji e_{p+i}`.
    pub fn spanning_rows(&self) -> DMatrix<f64> {
        let (p, q) = self.signature();
        let mut b = DMatrix::zeros(p, p + q);
        b.view_mut((0, 0), (p, p)).fill_with_identity();
        b.view_mut((0, p), (p, q)).copy_from(&self.tau);
        b
    }

    /// `I - tau tau^T`.
    pub fn plane_gram(&self) -> DMatrix<f64> {
        let p = self.tau.nrows();
        DMatrix::identity(p, p) - &self.tau * self.tau.transpose()
    }

    /// Row-major decimal text with the signature on the first line.
    pub fn to_text(&self) -> String {
        let (p, q) = self.signature();
        let mut s = format!("{p} {q}\n");
        for i in 0..p {
            let row: Vec<String> = (0..q)
                .map(|j| format!("{:.11e}", self.tau[(i, j)]))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, PeriodError> {
        let bad = |m: &str| PeriodError::DimensionMismatch(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty period point"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad signature line")))
            .collect::<Result<_, _>>()?;
        let [p, q] = head[..] else {
            return Err(bad("signature line needs two integers"));
        };
        let vals: Vec<f64> = lines
            .flat_map(|l| l.split_whitespace())
            .map(|t| t.parse().map_err(|_| bad("bad entry")))
            .collect::<Result<_, _>>()?;
        if vals.len() != p * q {
            return Err(bad("entry count does not match the signature"));
        }
        Self::new(DMatrix::from_row_slice(p, q, &vals))
    }
}

/// `tau` from any `p x (p+q)` matrix whose rows span a positive plane.
pub fn normalize_basis(b: &DMatrix<f64>, p: usize, q: usize) -> Result<PeriodPoint, PeriodError> {
    if b.nrows() != p || b.ncols() != p + q {
        return Err(PeriodError::DimensionMismatch(format!(
            "expected a {p}x{} matrix, got {}x{}",
            p + q,
            b.nrows(),
            b.ncols()
        )));
    }
    let sv = b.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * top.max(1.0)).count();
    if rank < p {
        return Err(PeriodError::DegeneratePlane { rank, p });
    }
    let gram = b * form_j(p, q) * b.transpose();
    let ev = min_eigenvalue(&gram);
    if !(ev > POSITIVITY_TOL) {
        return Err(PeriodError::NotPositivePlane(ev));
    }
    let a = b.view((0, 0), (p, p)).into_owned();
    let inv = a.try_inverse().ok_or(PeriodError::NotPositivePlane(ev))?;
    PeriodPoint::new(inv * b.view((0, p), (p, q)))
}

/// A point with entries uniform in `[-scale, scale] / sqrt(q)`; `scale < 1`
/// keeps `tau tau^T` below the identity.
pub fn random_point(
    rng: &mut impl Rng,
    p: usize,
    q: usize,
    scale: f64,
) -> Result<PeriodPoint, PeriodError> {
    let t = DMatrix::from_fn(p, q, |_, _| {
        rng.gen_range(-1.0..1.0) * scale / (q as f64).sqrt()
    });
    PeriodPoint::new(t)
}

/// `det(I - tau tau^T)`.
pub fn gram_det(pt: &PeriodPoint) -> f64 {
    pt.plane_gram().determinant()
}

/// Sum of squared entries.
pub fn bergman_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}
