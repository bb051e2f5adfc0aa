use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::CountError;
use crate::rational::{format_rational, rat, rat_frac, to_f64, Rational};

/// `q^offset * sum_{n <= order} coeffs[n] q^n`, exact, truncated at `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    offset: Rational,
    coeffs: Vec<BigInt>,
}

impl PowerSeries {
    /// Pads or cuts `coeffs` to `order + 1` entries.
    pub fn new(offset: Rational, mut coeffs: Vec<BigInt>, order: i64) -> Result<Self, CountError> {
        if order < 0 {
            return Err(CountError::NegativeTruncation(order));
        }
        coeffs.resize(order as usize + 1, BigInt::zero());
        Ok(Self { offset, coeffs })
    }

    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); order + 1];
        coeffs[0] = BigInt::one();
        Self {
            offset: rat(0),
            coeffs,
        }
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `q^(offset + n)`.
    pub fn coefficient(&self, n: usize) -> BigInt {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    pub fn with_offset(mut self, offset: Rational) -> Self {
        self.offset = offset;
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self, CountError> {
        if self.offset != other.offset {
            return Err(CountError::OffsetMismatch(
                format_rational(&self.offset),
                format_rational(&other.offset),
            ));
        }
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|i| &self.coeffs[i] + &other.coeffs[i])
            .collect();
        Ok(Self {
            offset: self.offset.clone(),
            coeffs,
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![BigInt::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Self {
            offset: &self.offset + &other.offset,
            coeffs,
        }
    }

    /// Multiplies in place by `(1 - q^n)^e`, expanding the binomial exactly.
    pub fn mul_binomial(&mut self, n: usize, e: &BigInt) {
        let order = self.order();
        if n == 0 || n > order || e.is_zero() {
            return;
        }
        let kmax = order / n;
        let mut terms = Vec::with_capacity(kmax + 1);
        let mut c = BigInt::one();
        terms.push(c.clone());
        for k in 1..=kmax {
            c = -(c * (e - BigInt::from(k - 1))) / BigInt::from(k);
            if c.is_zero() {
                break;
            }
            terms.push(c.clone());
        }
        for i in (0..=order).rev() {
            let mut s = BigInt::zero();
            for (k, t) in terms.iter().enumerate() {
                if k * n > i {
                    break;
                }
                let a = &self.coeffs[i - k * n];
                if !a.is_zero() {
                    s += a * t;
                }
            }
            self.coeffs[i] = s;
        }
    }

    /// `-q d/dq log` of the power-series part. The leading coefficient must
    /// be `+-1`; the prefactor `q^offset` would only add the constant
    /// `-offset` and is dropped.
    pub fn neg_log_derivative(&self) -> Result<Self, CountError> {
        let p = &self.coeffs;
        let lead = &p[0];
        if !lead.abs().is_one() {
            return Err(CountError::NotInvertible(lead.to_string()));
        }
        let n = self.order();
        let mut l = vec![BigInt::zero(); n + 1];
        for k in 1..=n {
            let mut s = -(BigInt::from(k) * &p[k]);
            for j in 1..k {
                if !p[j].is_zero() {
                    s -= &p[j] * &l[k - j];
                }
            }
            l[k] = s * lead;
        }
        Ok(Self {
            offset: rat(0),
            coeffs: l,
        })
    }

    /// `(exponent, coefficient)` for the nonzero terms.
    pub fn terms(&self) -> Vec<(Rational, BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (&self.offset + rat(i as i64), c.clone()))
            .collect()
    }

    /// Value of the truncated series at a real `0 < q < 1`.
    pub fn evaluate(&self, q: f64) -> f64 {
        let head = q.powf(to_f64(&self.offset));
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * q + c.to_f64().unwrap_or(f64::NAN);
        }
        head * acc
    }

    /// One `exponent,coefficient` line per nonzero term.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("exponent,coefficient\n");
        for (e, c) in self.terms() {
            s.push_str(&format!("{},{c}\n", format_rational(&e)));
        }
        s
    }
}

/// `prod_{n=1}^{N} (1 - q^n)` with the offset `1/24` recorded.
pub fn euler_product(order: i64) -> Result<PowerSeries, CountError> {
    if order < 0 {
        return Err(CountError::NegativeTruncation(order));
    }
    let mut s = PowerSeries::one(order as usize);
    for n in 1..=order as usize {
        s.mul_binomial(n, &BigInt::one());
    }
    Ok(s.with_offset(rat_frac(1, 24)))
}

/// `c_m = sum_{d | m} d a_d`, with `a[d - 1] = a_d`.
pub fn lambert_coefficients(a: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    let mut c = vec![BigInt::zero(); n + 1];
    for d in 1..=n {
        if a[d - 1].is_zero() {
            continue;
        }
        let w = BigInt::from(d) * &a[d - 1];
        for m in (d..=n).step_by(d) {
            c[m] += &w;
        }
    }
    c
}
