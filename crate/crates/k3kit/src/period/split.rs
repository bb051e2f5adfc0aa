use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};

use super::{form_j, normalize_basis, PeriodError, PeriodPoint};

const PAIR_TOL: f64 = 1e-12;

/// A point of `h_{p,q}` seen through a hyperbolic pair `(u1, u2)`: the plane
/// `E` meets `u2^perp` in a positive `(p-1)`-plane of `W = <u1,u2>^perp`, and
/// the leftover direction is `f1 = mu + u1 + c u2` with `<f1,u2> = 1`.
#[derive(Debug, Clone)]
pub struct HSplit {
    pub point: PeriodPoint,
    /// `mu` in the coordinates of `w_frame`.
    pub mu: DVector<f64>,
    /// `<f1, f1> / 2`, always positive.
    pub lambda: f64,
    /// Orthonormal rows spanning `W`, positives first, in ambient frame
    /// coordinates.
    pub w_frame: DMatrix<f64>,
}

impl HSplit {
    /// The `u2` coefficient `c = lambda - <mu,mu>/2` of `f1`.
    pub fn u2_coefficient(&self) -> f64 {
        let (p, q) = self.point.signature();
        self.lambda - quad(&self.mu, p, q) / 2.0
    }
}

fn quad(v: &DVector<f64>, p: usize, q: usize) -> f64 {
    (v.transpose() * form_j(p, q) * v)[(0, 0)]
}

fn pairing(a: &RowDVector<f64>, b: &DVector<f64>, p: usize) -> f64 {
    (0..a.len())
        .map(|i| if i < p { a[i] * b[i] } else { -a[i] * b[i] })
        .sum()
}

fn check_pair(p: usize, q: usize, u1: &DVector<f64>, u2: &DVector<f64>) -> Result<(), PeriodError> {
    if p < 3 || q < 2 {
        return Err(PeriodError::HypothesisViolated { p, q });
    }
    if u1.len() != p + q || u2.len() != p + q {
        return Err(PeriodError::DimensionMismatch(format!(
            "pair vectors must have length {}",
            p + q
        )));
    }
    let scale = u1.norm_squared().max(u2.norm_squared()).max(1.0);
    let ok = quad(u1, p, q).abs() <= PAIR_TOL * scale
        && quad(u2, p, q).abs() <= PAIR_TOL * scale
        && ((u1.transpose() * form_j(p, q) * u2)[(0, 0)] - 1.0).abs() <= PAIR_TOL * scale;
    if ok {
        Ok(())
    } else {
        Err(PeriodError::PairNotHyperbolic)
    }
}

/// `x - <x,u2> u1 - <x,u1> u2`.
fn project(x: &RowDVector<f64>, u1: &DVector<f64>, u2: &DVector<f64>, p: usize) -> RowDVector<f64> {
    x - u1.transpose() * pairing(x, u2, p) - u2.transpose() * pairing(x, u1, p)
}

/// Diagonalizes the form on the projected basis vectors; eigenvectors of
/// that Gram are orthogonal for the form, so rescaling gives a frame.
fn w_frame(p: usize, q: usize, u1: &DVector<f64>, u2: &DVector<f64>) -> DMatrix<f64> {
    let n = p + q;
    let mut proj = DMatrix::zeros(n, n);
    for i in 0..n {
        let e = RowDVector::from_fn(n, |_, j| (i == j) as u8 as f64);
        proj.row_mut(i).copy_from(&project(&e, u1, u2, p));
    }
    let gram = &proj * form_j(p, q) * proj.transpose();
    let eig = SymmetricEigen::new((&gram + gram.transpose()) * 0.5);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    // p-1 largest are positive, q-1 smallest negative, two near-zero between
    let chosen: Vec<usize> = idx[..p - 1]
        .iter()
        .chain(idx[n - (q - 1)..].iter())
        .copied()
        .collect();
    let mut frame = DMatrix::zeros(n - 2, n);
    for (k, &i) in chosen.iter().enumerate() {
        let c = eig.eigenvectors.column(i).transpose();
        let row = c * &proj / eig.eigenvalues[i].abs().sqrt();
        frame.row_mut(k).copy_from(&row);
    }
    frame
}

pub fn split_h(
    pt: &PeriodPoint,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
) -> Result<HSplit, PeriodError> {
    let (p, q) = pt.signature();
    check_pair(p, q, u1, u2)?;
    let n = p + q;
    let wf = w_frame(p, q, u1, u2);
    let to_w = form_j(p, q) * wf.transpose() * form_j(p - 1, q - 1);

    let e = pt.spanning_rows();
    let a: Vec<f64> = (0..p)
        .map(|j| pairing(&e.row(j).into_owned(), u2, p))
        .collect();
    let pivot = (0..p)
        .max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
        .expect("p >= 3");
    if a[pivot].abs() < PAIR_TOL {
        return Err(PeriodError::DegeneratePlane { rank: p - 1, p });
    }
    let ep = e.row(pivot).into_owned();
    let mut b = DMatrix::zeros(p - 1, n);
    for (k, j) in (0..p).filter(|&j| j != pivot).enumerate() {
        b.row_mut(k)
            .copy_from(&(e.row(j) - &ep * (a[j] / a[pivot])));
    }
    let jm = form_j(p, q);
    let bgram = &b * &jm * b.transpose();
    let binv = bgram
        .try_inverse()
        .ok_or(PeriodError::DegeneratePlane { rank: p - 1, p })?;
    let f = &ep - (&ep * &jm * b.transpose()) * binv * &b;
    let f1 = f / a[pivot];

    let mu_amb = project(&f1, u1, u2, p);
    let mu = (mu_amb * &to_w).transpose();
    let lambda = pairing(&f1, &f1.transpose(), p) / 2.0;

    let mut plane = DMatrix::zeros(p - 1, n - 2);
    for k in 0..p - 1 {
        let r = project(&b.row(k).into_owned(), u1, u2, p);
        plane.row_mut(k).copy_from(&(r * &to_w));
    }
    let point = normalize_basis(&plane, p - 1, q - 1)?;
    Ok(HSplit {
        point,
        mu,
        lambda,
        w_frame: wf,
    })
}

pub fn compose_h(
    split: &HSplit,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
) -> Result<PeriodPoint, PeriodError> {
    let (pw, qw) = split.point.signature();
    let (p, q) = (pw + 1, qw + 1);
    check_pair(p, q, u1, u2)?;
    if split.mu.len() != pw + qw {
        return Err(PeriodError::DimensionMismatch(
            "mu does not match the point".into(),
        ));
    }
    let n = p + q;
    let wf = w_frame(p, q, u1, u2);
    let mu_amb = split.mu.transpose() * &wf;
    let mut e = DMatrix::zeros(p, n);
    let rows = split.point.spanning_rows() * &wf;
    for k in 0..pw {
        let w = rows.row(k).into_owned();
        let s = pairing(&w, &mu_amb.transpose(), p);
        e.row_mut(k).copy_from(&(w - u2.transpose() * s));
    }
    let f1 = mu_amb + u1.transpose() + u2.transpose() * split.u2_coefficient();
    e.row_mut(pw).copy_from(&f1);
    normalize_basis(&e, p, q)
}
