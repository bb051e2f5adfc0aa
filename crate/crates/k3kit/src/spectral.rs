//! Dedekind eta, the zeta-regularized determinant of the flat torus
//! `C / (Z + tau Z)`, and assembly of a determinant from a Gram factor and a
//! supplied exponent.
//!
//! `zeta'(0)` is split at `t0 = 1/(4 pi)`: the large-time heat trace gives
//! `sum' E1(t0 mu)`, the small-time part goes through Poisson summation over
//! the period lattice and contributes
//! `(A/pi) sum' exp(-|l|^2 / 4t0) / |l|^2 - A/(4 pi t0) - ln t0 - gamma`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{json, Value};
use statrs::consts::EULER_MASCHERONI;
use statrs::function::exponential::integral as exp_integral;
use thiserror::Error;

use crate::period::{gram_det, PeriodPoint};

pub const TERM_BUDGET: usize = 1_000_000;
pub const DEFAULT_PRECISION: f64 = 1e-6;
/// Fewest factors used for eta, whatever the precision.
pub const MIN_ETA_TERMS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("Im tau = {0} is not positive")]
    LowerHalfPlane(f64),
    #[error("term budget {budget} exhausted before reaching precision {precision:e}")]
    PrecisionNotReached { budget: usize, precision: f64 },
    #[error("{0}")]
    InvalidPeriodPoint(String),
    #[error("{0}")]
    InvalidPrecision(String),
}

impl SpectralError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::LowerHalfPlane(_) => "LowerHalfPlane",
            Self::PrecisionNotReached { .. } => "PrecisionNotReached",
            Self::InvalidPeriodPoint(_) => "InvalidPeriodPoint",
            Self::InvalidPrecision(_) => "InvalidPrecision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusModulus(Complex64);

impl TorusModulus {
    pub fn new(tau: Complex64) -> Result<Self, SpectralError> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(SpectralError::LowerHalfPlane(tau.im));
        }
        Ok(Self(tau))
    }

    pub fn tau(&self) -> Complex64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaValue {
    pub value: Complex64,
    pub terms: usize,
    /// Bound on `|eta - value|` from the geometric tail of the product.
    pub error_bound: f64,
}

/// `q^(1/24) prod_{n <= N} (1 - q^n)` with `q = exp(2 pi i tau)`.
pub fn eta_value(m: &TorusModulus, terms: usize) -> EtaValue {
    let tau = m.tau();
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    let q = (i2pi * tau).exp();
    let mut prod = (i2pi * tau / 24.0).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 0..terms {
        qn *= q;
        prod *= Complex64::new(1.0, 0.0) - qn;
    }
    let r = q.norm();
    // |prod_{n>N}(1 - q^n) - 1| <= exp(r^{N+1} / (1-r)^2) - 1, at most twice
    // the exponent while that exponent stays below one
    let tail = r.powi(terms as i32 + 1) / ((1.0 - r) * (1.0 - r));
    EtaValue {
        value: prod,
        terms,
        error_bound: prod.norm() * tail.exp_m1().max(2.0 * tail),
    }
}

/// Enough factors that the omitted tail is below `precision`.
pub fn eta_terms_for(m: &TorusModulus, precision: f64) -> usize {
    let r = (-2.0 * PI * m.tau().im).exp();
    let need = (precision.ln() / r.ln()).ceil().max(0.0) as usize + 1;
    need.max(MIN_ETA_TERMS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetReport {
    pub tau: Complex64,
    pub det_value: f64,
    pub eta_value: Complex64,
    /// `(Im tau)^2 |eta|^4`.
    pub closed_form: f64,
    pub identity_residual: f64,
    pub terms_used: usize,
    pub target_precision: f64,
}

impl DetReport {
    pub fn to_text(&self) -> String {
        let rows = [
            ("tau_re", format!("{:.11e}", self.tau.re)),
            ("tau_im", format!("{:.11e}", self.tau.im)),
            ("det_value", format!("{:.11e}", self.det_value)),
            ("eta_re", format!("{:.11e}", self.eta_value.re)),
            ("eta_im", format!("{:.11e}", self.eta_value.im)),
            ("closed_form", format!("{:.11e}", self.closed_form)),
            (
                "identity_residual",
                format!("{:.11e}", self.identity_residual),
            ),
            ("terms_used", self.terms_used.to_string()),
            (
                "target_precision",
                format!("{:.11e}", self.target_precision),
            ),
        ];
        rows.iter().map(|(k, v)| format!("{k:<18} {v}\n")).collect()
    }

    pub fn to_json(&self) -> Value {
        let f = |x: f64| format!("{x:.11e}");
        json!({
            "tau": [f(self.tau.re), f(self.tau.im)],
            "det_value": f(self.det_value),
            "eta_value": [f(self.eta_value.re), f(self.eta_value.im)],
            "closed_form": f(self.closed_form),
            "identity_residual": f(self.identity_residual),
            "terms_used": self.terms_used,
            "target_precision": f(self.target_precision),
        })
    }
}

/// Sum of `f(m, n)` over `(m, n) != 0` with `|m + n tau|^2 <= r2`, in a
/// fixed order. Returns the number of terms as well.
fn lattice_sum(
    tau: Complex64,
    r2: f64,
    budget: usize,
    f: impl Fn(i64, i64) -> f64,
) -> Option<(f64, usize)> {
    let y = tau.im;
    let nmax = (r2.sqrt() / y).floor() as i64;
    let mut s = 0.0;
    let mut count = 0usize;
    for n in -nmax..=nmax {
        let ny = n as f64 * y;
        let room = (r2 - ny * ny).max(0.0).sqrt();
        let c = -(n as f64) * tau.re;
        for m in (c - room).ceil() as i64..=(c + room).floor() as i64 {
            if m == 0 && n == 0 {
                continue;
            }
            count += 1;
            if count > budget {
                return None;
            }
            s += f(m, n);
        }
    }
    Some((s, count))
}

/// `zeta'(0)` of the flat Laplacian and the number of lattice terms used.
pub fn zeta_prime_zero(m: &TorusModulus, precision: f64) -> Result<(f64, usize), SpectralError> {
    zeta_prime_zero_with_budget(m, precision, TERM_BUDGET)
}

pub fn zeta_prime_zero_with_budget(
    m: &TorusModulus,
    precision: f64,
    budget: usize,
) -> Result<(f64, usize), SpectralError> {
    if !(precision > 0.0 && precision < 1.0) {
        return Err(SpectralError::InvalidPrecision(format!(
            "precision {precision} not in (0, 1)"
        )));
    }
    let tau = m.tau();
    let (x, y) = (tau.re, tau.im);
    let t0 = 1.0 / (4.0 * PI);
    // both sums decay like exp(-pi r^2); stop a few digits past the target
    let r2 = (-(precision * 1e-4).ln() / PI).max(1.0);
    let exhausted = SpectralError::PrecisionNotReached { budget, precision };
    // dual vectors: |v*|^2 = |a + b tau|^2 / y^2, eigenvalue 4 pi^2 |v*|^2
    let (dual, c1) = lattice_sum(tau, r2 * y * y, budget, |a, b| {
        let v2 = ((a as f64 + b as f64 * x).powi(2) + (b as f64 * y).powi(2)) / (y * y);
        exp_integral(t0 * 4.0 * PI * PI * v2, 1).unwrap_or(0.0)
    })
    .ok_or(exhausted.clone())?;
    let (direct, c2) = lattice_sum(tau, r2, budget - c1, |a, b| {
        let l2 = (a as f64 + b as f64 * x).powi(2) + (b as f64 * y).powi(2);
        (-l2 / (4.0 * t0)).exp() / l2
    })
    .ok_or(exhausted)?;
    let area = y;
    let z = dual + area / PI * direct - area / (4.0 * PI * t0) - t0.ln() - EULER_MASCHERONI;
    Ok((z, c1 + c2))
}

/// `det' = exp(-zeta'(0))`, checked against `(Im tau)^2 |eta|^4`.
pub fn torus_det(m: &TorusModulus, precision: f64) -> Result<DetReport, SpectralError> {
    let (z, terms) = zeta_prime_zero(m, precision)?;
    let det = (-z).exp();
    let eta = eta_value(m, eta_terms_for(m, precision * 1e-6));
    let closed = m.tau().im.powi(2) * eta.value.norm().powi(4);
    Ok(DetReport {
        tau: m.tau(),
        det_value: det,
        eta_value: eta.value,
        closed_form: closed,
        identity_residual: (det - closed).abs() / det,
        terms_used: terms,
        target_precision: precision,
    })
}

/// `constant * gram_det(point) * |exp(phi(point))|^2` on `h_{3,19}`.
pub fn k3_det_assembly(
    point: &PeriodPoint,
    phi: impl Fn(&PeriodPoint) -> Complex64,
    constant: f64,
) -> Result<f64, SpectralError> {
    if point.signature() != (3, 19) {
        return Err(SpectralError::InvalidPeriodPoint(format!(
            "expected signature (3, 19), got {:?}",
            point.signature()
        )));
    }
    if !(constant > 0.0) {
        return Err(SpectralError::InvalidPeriodPoint(format!(
            "constant {constant} is not positive"
        )));
    }
    let e = phi(point);
    Ok(constant * gram_det(point) * (2.0 * e.re).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn tau(re: f64, im: f64) -> TorusModulus {
        TorusModulus::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn eta_at_i() {
        let e = eta_value(&tau(0.0, 1.0), 40);
        assert!((e.value.norm().powi(4) - 0.348300982421419).abs() < 1e-13);
        // eta(i) = Gamma(1/4) / (2 pi^{3/4})
        let closed = 3.625609908221908 / (2.0 * PI.powf(0.75));
        assert!((e.value.re - closed).abs() < 1e-14);
    }

    #[test]
    fn eta_translation_and_truncation() {
        for (re, im) in [(0.0, 1.0), (0.3, 0.7), (-0.25, 2.0)] {
            let a = eta_value(&tau(re, im), 8);
            let b = eta_value(&tau(re + 1.0, im), 8);
            assert!((a.value.norm() - b.value.norm()).abs() < 1e-14);
            let long = eta_value(&tau(re, im), 16);
            assert!((a.value - long.value).norm() <= a.error_bound);
        }
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert_eq!(
            TorusModulus::new(Complex64::new(0.5, 0.0)).unwrap_err(),
            SpectralError::LowerHalfPlane(0.0)
        );
        assert!(TorusModulus::new(Complex64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn kronecker_values() {
        for (re, im, want) in [
            (0.0, 1.0, 0.348300982421419),
            (0.0, 2.0, 0.492571973128244),
            (0.5, 1.0, 0.353543527002754),
            (1.0 / 3.0, 2.0, 0.49258227989262),
        ] {
            let r = torus_det(&tau(re, im), 1e-8).unwrap();
            assert!(
                (r.det_value - want).abs() / want < 1e-9,
                "{re} {im}: {}",
                r.det_value
            );
            assert!(r.identity_residual < 1e-9);
        }
    }

    #[test]
    fn shift_invariance() {
        let a = torus_det(&tau(0.2, 1.3), 1e-10).unwrap();
        let b = torus_det(&tau(1.2, 1.3), 1e-10).unwrap();
        assert!((a.det_value - b.det_value).abs() / a.det_value < 1e-10);
    }

    #[test]
    fn budget_exhaustion() {
        let e = zeta_prime_zero_with_budget(&tau(0.0, 1.0), 1e-6, 10).unwrap_err();
        assert_eq!(e.code(), "PrecisionNotReached");
    }

    #[test]
    fn assembly_with_zero_phi() {
        let base = PeriodPoint::base(3, 19);
        assert_eq!(
            k3_det_assembly(&base, |_| Complex64::new(0.0, 0.0), 1.0).unwrap(),
            1.0
        );
        let mut t = DMatrix::zeros(3, 19);
        t[(0, 0)] = 0.3;
        t[(2, 5)] = -0.4;
        let pt = PeriodPoint::new(t).unwrap();
        let v = k3_det_assembly(&pt, |_| Complex64::new(0.0, 0.7), 1.0).unwrap();
        assert_eq!(v, gram_det(&pt));
        let w = k3_det_assembly(&pt, |_| Complex64::new(0.5, 0.0), 2.0).unwrap();
        assert!((w - 2.0 * gram_det(&pt) * 1f64.exp()).abs() < 1e-14);
        assert!(matches!(
            k3_det_assembly(&PeriodPoint::base(2, 3), |_| Complex64::new(0.0, 0.0), 1.0),
            Err(SpectralError::InvalidPeriodPoint(_))
        ));
    }
}
