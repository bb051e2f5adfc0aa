//! Small helpers around `BigRational`: parsing `"p/q"` literals and the JSON
//! encoding used for coordinates (plain integers, or strings for fractions).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_int(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Parses `"7"`, `"-3/4"` or `" 2 / 6 "`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => t.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Integers that fit in `i64` become JSON numbers, everything else a string.
pub fn rational_to_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Some(v) = r.numer().to_i64() {
            return Value::from(v);
        }
    }
    Value::String(format_rational(r))
}

pub fn rational_from_json(v: &Value) -> Option<Rational> {
    match v {
        Value::Number(n) => n.as_i64().map(rat),
        Value::String(s) => parse_rational(s),
        _ => None,
    }
}

pub fn rationals_from_json(v: &Value) -> Option<Vec<Rational>> {
    v.as_array()?.iter().map(rational_from_json).collect()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // very large numerators: divide in f64 after scaling by bit length
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Nearest integer, ties rounded up.
pub fn round_half_up(r: &Rational) -> BigInt {
    (r + Rational::new(BigInt::one(), BigInt::from(2)))
        .floor()
        .to_integer()
}
