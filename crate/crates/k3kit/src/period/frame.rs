use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;

use super::{PeriodError, PeriodPoint};
use crate::lattice::linalg::{diagonalize, inverse, to_rational};
use crate::lattice::{Lattice, LatticeVector};
use crate::rational::{to_f64, Rational};

/// An orthonormal frame for `Lattice (x) R`: rows `f_k` (in lattice
/// coordinates) with `<f_k, f_l> = J_kl`, positive vectors first.
#[derive(Debug, Clone)]
pub struct Frame {
    lattice: Lattice,
    /// Frame rows in lattice coordinates: `x = y * from_frame`.
    from_frame: DMatrix<f64>,
    to_frame: DMatrix<f64>,
}

impl Frame {
    pub fn new(lattice: &Lattice) -> Self {
        let n = lattice.rank();
        let (pm, d) = diagonalize(&to_rational(lattice.gram()));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| d[i] < Rational::from_integer(0.into()));
        let p_sorted: Vec<Vec<Rational>> = order.iter().map(|&i| pm[i].clone()).collect();
        let scale: Vec<f64> = order.iter().map(|&i| to_f64(&d[i]).abs().sqrt()).collect();
        let pinv = inverse(&p_sorted).expect("congruence matrix is invertible");
        let from_frame = DMatrix::from_fn(n, n, |k, i| to_f64(&p_sorted[k][i]) / scale[k]);
        let to_frame = DMatrix::from_fn(n, n, |i, k| to_f64(&pinv[i][k]) * scale[k]);
        Self {
            lattice: lattice.clone(),
            from_frame,
            to_frame,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Frame coordinates of lattice-coordinate row vectors.
    pub fn to_frame(&self) -> &DMatrix<f64> {
        &self.to_frame
    }

    pub fn from_frame(&self) -> &DMatrix<f64> {
        &self.from_frame
    }

    /// Frame coordinates of a lattice vector.
    pub fn vector_in_frame(&self, v: &LatticeVector) -> Result<DVector<f64>, PeriodError> {
        if v.lattice() != &self.lattice {
            return Err(PeriodError::DimensionMismatch(format!(
                "vector lives in {} but the frame is for {}",
                v.lattice().label(),
                self.lattice.label()
            )));
        }
        let row = DMatrix::from_fn(1, self.lattice.rank(), |_, i| to_f64(&v.coords()[i]));
        Ok((row * &self.to_frame).transpose().column(0).into_owned())
    }

    /// `Fr gamma Fr^{-1}` after checking `gamma G gamma^T = G` exactly.
    pub fn isometry_in_frame(&self, gamma: &[Vec<BigInt>]) -> Result<DMatrix<f64>, PeriodError> {
        let n = self.lattice.rank();
        if gamma.len() != n || gamma.iter().any(|r| r.len() != n) {
            return Err(PeriodError::DimensionMismatch(format!(
                "isometry must be {n}x{n}"
            )));
        }
        for i in 0..n {
            for j in i..n {
                if self.lattice.pair_int(&gamma[i], &gamma[j])
                    != BigInt::from(self.lattice.gram()[i][j])
                {
                    return Err(PeriodError::NotIsometry);
                }
            }
        }
        let g = DMatrix::from_fn(n, n, |i, j| {
            to_f64(&Rational::from_integer(gamma[i][j].clone()))
        });
        Ok(&self.from_frame * g * &self.to_frame)
    }
}

/// Splits `[I | tau] Gamma = [mu | sigma]` and returns `mu` with the image
/// point `mu^{-1} sigma`.
pub fn factor_of_automorphy(
    frame: &Frame,
    gamma: &[Vec<BigInt>],
    pt: &PeriodPoint,
) -> Result<(DMatrix<f64>, PeriodPoint), PeriodError> {
    let (p, q) = pt.signature();
    if frame.lattice.signature() != (p, q) {
        return Err(PeriodError::DimensionMismatch(format!(
            "point has signature ({p}, {q}) but the lattice has {:?}",
            frame.lattice.signature()
        )));
    }
    let big = frame.isometry_in_frame(gamma)?;
    let rows = pt.spanning_rows() * big;
    let mu = rows.view((0, 0), (p, p)).into_owned();
    let sigma = rows.view((0, p), (p, q)).into_owned();
    let inv = mu
        .clone()
        .try_inverse()
        .ok_or(PeriodError::NotPositivePlane(0.0))?;
    Ok((mu, PeriodPoint::new(inv * sigma)?))
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_point;
    use super::super::{form_j, gram_det};
    use super::*;
    use crate::lattice::make_lattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Lattice {
        make_lattice("U^3+E8(-1)^2").unwrap()
    }

    fn identity(n: usize) -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect()
    }

    fn random_isometry(lat: &Lattice, rng: &mut ChaCha8Rng) -> Vec<Vec<BigInt>> {
        crate::orbit::random_isometry(lat, rng, 5).unwrap().matrix()
    }

    #[test]
    fn frame_is_orthonormal() {
        let lat = k3();
        let fr = Frame::new(&lat);
        let g = DMatrix::from_fn(22, 22, |i, j| lat.gram()[i][j] as f64);
        let j = fr.from_frame() * g * fr.from_frame().transpose();
        assert!((j - form_j(3, 19)).amax() < 1e-12);
        let id = fr.from_frame() * fr.to_frame();
        assert!((id - DMatrix::identity(22, 22)).amax() < 1e-12);
    }

    #[test]
    fn identity_has_trivial_factor() {
        let lat = k3();
        let fr = Frame::new(&lat);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pt = random_point(&mut rng, 3, 19, 0.5);
        let (mu, img) = factor_of_automorphy(&fr, &identity(22), &pt).unwrap();
        assert!((mu - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert!((img.tau() - pt.tau()).amax() < 1e-12);
    }

    #[test]
    fn gram_det_transforms_with_weight_minus_two() {
        let lat = k3();
        let fr = Frame::new(&lat);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let gamma = random_isometry(&lat, &mut rng);
            let pt = random_point(&mut rng, 3, 19, 0.5);
            let (mu, img) = factor_of_automorphy(&fr, &gamma, &pt).unwrap();
            let dm = mu.determinant();
            let rel = (gram_det(&img) * dm * dm - gram_det(&pt)).abs() / gram_det(&pt);
            assert!(rel < 1e-9, "{rel}");
        }
    }

    #[test]
    fn cocycle() {
        let lat = k3();
        let fr = Frame::new(&lat);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let g1 = random_isometry(&lat, &mut rng);
            let g2 = random_isometry(&lat, &mut rng);
            let prod: Vec<Vec<BigInt>> = (0..22)
                .map(|i| {
                    (0..22)
                        .map(|j| (0..22).map(|k| &g1[i][k] * &g2[k][j]).sum())
                        .collect()
                })
                .collect();
            let pt = random_point(&mut rng, 3, 19, 0.5);
            let (m1, t1) = factor_of_automorphy(&fr, &g1, &pt).unwrap();
            let (m2, _) = factor_of_automorphy(&fr, &g2, &t1).unwrap();
            let (m12, _) = factor_of_automorphy(&fr, &prod, &pt).unwrap();
            let composed = &m1 * &m2;
            assert!((&m12 - &composed).amax() / composed.amax() < 1e-9);
        }
    }

    #[test]
    fn non_isometry_rejected() {
        let lat = k3();
        let fr = Frame::new(&lat);
        let mut g = identity(22);
        g[0][0] = BigInt::from(2);
        let pt = PeriodPoint::base(3, 19);
        assert_eq!(
            factor_of_automorphy(&fr, &g, &pt).unwrap_err(),
            PeriodError::NotIsometry
        );
    }
}
