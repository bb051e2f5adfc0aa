use num_complex::Complex;
use num_traits::{Signed, Zero};

use super::PeriodError;
use crate::lattice::linalg::{diagonalize, to_rational};
use crate::lattice::Lattice;
use crate::rational::{rat, Rational};

pub type ComplexVector = Vec<Complex<Rational>>;

/// A form of signature `(1, k)` together with the component `V+` of its
/// positive cone that contains a fixed positive vector.
#[derive(Debug, Clone)]
pub struct TubeForm {
    lattice: Lattice,
    cone: Vec<Rational>,
}

impl TubeForm {
    pub fn new(lattice: &Lattice) -> Result<Self, PeriodError> {
        let (p, q) = lattice.signature();
        if p != 1 {
            return Err(PeriodError::NotLorentzian(p, q));
        }
        let (pm, d) = diagonalize(&to_rational(lattice.gram()));
        let i = d
            .iter()
            .position(|x| x.is_positive())
            .expect("one positive direction");
        Ok(Self {
            lattice: lattice.clone(),
            cone: pm[i].clone(),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn in_cone(&self, y: &[Rational]) -> bool {
        self.lattice.pair_rat(y, y).is_positive()
            && self.lattice.pair_rat(y, &self.cone).is_positive()
    }

    /// Complex bilinear extension of the form on `lattice + U`, with the
    /// hyperbolic plane in the last two slots.
    pub fn ambient_pair(
        &self,
        a: &[Complex<Rational>],
        b: &[Complex<Rational>],
    ) -> Complex<Rational> {
        let n = self.lattice.rank();
        let g = self.lattice.gram();
        let mut s = Complex::new(rat(0), rat(0));
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if g[i][j] != 0 && !b[j].is_zero() {
                    s = s + a[i].clone() * b[j].clone() * Complex::new(rat(g[i][j]), rat(0));
                }
            }
        }
        if a.len() == n + 2 {
            s = s + a[n].clone() * b[n + 1].clone() + a[n + 1].clone() * b[n].clone();
        }
        s
    }
}

/// `<a, conj b>` on `lattice + U`.
pub fn hermitian_pairing(
    form: &TubeForm,
    a: &[Complex<Rational>],
    b: &[Complex<Rational>],
) -> Complex<Rational> {
    let conj: ComplexVector = b.iter().map(|z| z.conj()).collect();
    form.ambient_pair(a, &conj)
}

/// `Psi(w) = (w, -<w,w>/2, 1)`.
pub fn tube_embed(form: &TubeForm, w: &[Complex<Rational>]) -> Result<ComplexVector, PeriodError> {
    let n = form.lattice.rank();
    if w.len() != n {
        return Err(PeriodError::DimensionMismatch(format!(
            "expected {n} coordinates, got {}",
            w.len()
        )));
    }
    let y: Vec<Rational> = w.iter().map(|z| z.im.clone()).collect();
    if !form.in_cone(&y) {
        return Err(PeriodError::ImaginaryPartNotInCone);
    }
    let ww = form.ambient_pair(w, w);
    let mut psi = w.to_vec();
    psi.push(-ww * Complex::new(rat(1) / rat(2), rat(0)));
    psi.push(Complex::new(rat(1), rat(0)));
    Ok(psi)
}
