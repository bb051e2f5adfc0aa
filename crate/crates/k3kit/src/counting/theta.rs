//! Norm counts `r(m) = #{x : -<x,x> = m}` of negative definite blocks, from
//! closed-form theta products or from explicit short-vector enumeration.

use super::CountError;
use crate::lattice::fp::ShortVectors;
use crate::lattice::Summand;

fn sparse_power(base: &[(usize, i128)], e: u32, max: usize) -> Vec<i128> {
    let mut acc = vec![0i128; max + 1];
    acc[0] = 1;
    for _ in 0..e {
        let mut next = vec![0i128; max + 1];
        for (i, a) in acc.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for &(k, b) in base {
                if i + k > max {
                    break;
                }
                next[i + k] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// `sum_k t^(k^2)`, optionally with signs `(-1)^k`.
fn theta3(max: usize, alternating: bool) -> Vec<(usize, i128)> {
    let mut out = vec![(0, 1)];
    let mut k = 1usize;
    while k * k <= max {
        let s = if alternating && k % 2 == 1 { -2 } else { 2 };
        out.push((k * k, s));
        k += 1;
    }
    out
}

/// `sum_k t^(k^2 + k)`, so that `theta_2 = t^(1/4)` times this.
fn theta2_reduced(max: usize) -> Vec<(usize, i128)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) <= max {
        out.push((k * (k + 1), 2));
        k += 1;
    }
    out
}

/// Closed-form counts: `(theta_3^8 + theta_4^8 + theta_2^8) / 2` for E8 and
/// `sum_j t^(2k j^2)` for `<-2k>`.
pub fn theta_counts(s: Summand, max: usize) -> Result<Vec<i128>, CountError> {
    match s {
        Summand::E8 => {
            let a = sparse_power(&theta3(max, false), 8, max);
            let b = sparse_power(&theta3(max, true), 8, max);
            // theta_2^8 = t^2 * (sum t^(k^2+k))^8
            let c = if max >= 2 {
                sparse_power(&theta2_reduced(max - 2), 8, max - 2)
            } else {
                Vec::new()
            };
            Ok((0..=max)
                .map(|m| {
                    let cm = if m >= 2 { c[m - 2] } else { 0 };
                    (a[m] + b[m] + cm) / 2
                })
                .collect())
        }
        Summand::Rank1(d) => {
            let k = (-d) as usize;
            let mut out = vec![0i128; max + 1];
            out[0] = 1;
            let mut j = 1usize;
            while k * j * j <= max {
                out[k * j * j] += 2;
                j += 1;
            }
            Ok(out)
        }
        Summand::Hyperbolic => Err(CountError::UnsupportedShape("U is not definite".into())),
    }
}

/// Counts by Fincke–Pohst enumeration of the block itself.
pub fn enumerated_counts(s: Summand, max: usize) -> Result<Vec<i128>, CountError> {
    if s == Summand::Hyperbolic {
        return Err(CountError::UnsupportedShape("U is not definite".into()));
    }
    let neg: Vec<Vec<i64>> = s
        .gram()
        .iter()
        .map(|r| r.iter().map(|x| -x).collect())
        .collect();
    let sv = ShortVectors::new(neg).expect("definite block");
    Ok(sv.norm_counts(max).into_iter().map(|c| c as i128).collect())
}

pub fn convolve(a: &[i128], b: &[i128], max: usize) -> Result<Vec<i128>, CountError> {
    let mut out = vec![0i128; max + 1];
    for (i, x) in a.iter().enumerate().take(max + 1) {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(max + 1 - i) {
            if *y == 0 {
                continue;
            }
            let t = x.checked_mul(*y).ok_or(CountError::Overflow)?;
            out[i + j] = out[i + j].checked_add(t).ok_or(CountError::Overflow)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(k: u32, m: usize) -> i128 {
        (1..=m)
            .filter(|d| m % d == 0)
            .map(|d| (d as i128).pow(k))
            .sum()
    }

    #[test]
    fn e8_theta_is_eisenstein() {
        let r = theta_counts(Summand::E8, 400).unwrap();
        assert_eq!(r[0], 1);
        for m in 1..=400 {
            let want = if m % 2 == 0 { 240 * sigma(3, m / 2) } else { 0 };
            assert_eq!(r[m], want, "m = {m}");
        }
    }

    #[test]
    fn e8_squared_matches_weight_eight_eisenstein() {
        let r = theta_counts(Summand::E8, 200).unwrap();
        let rr = convolve(&r, &r, 200).unwrap();
        for m in (2..=200).step_by(2) {
            assert_eq!(rr[m], 480 * sigma(7, m / 2), "m = {m}");
        }
    }

    #[test]
    fn enumeration_agrees_with_closed_form() {
        let a = theta_counts(Summand::E8, 16).unwrap();
        let b = enumerated_counts(Summand::E8, 16).unwrap();
        assert_eq!(a, b);
        let a = theta_counts(Summand::Rank1(-6), 100).unwrap();
        let b = enumerated_counts(Summand::Rank1(-6), 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[6], 2);
        assert_eq!(a[24], 2);
        assert_eq!(a[7], 0);
    }
}
