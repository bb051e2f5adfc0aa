//! Exact linear algebra over `Z` and `Q` for small symmetric matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{rat, Rational};

pub type RatMatrix = Vec<Vec<Rational>>;

pub fn to_rational(m: &[Vec<i64>]) -> RatMatrix {
    m.iter()
        .map(|row| row.iter().map(|&x| rat(x)).collect())
        .collect()
}

/// Fraction-free determinant (Bareiss).
pub fn det_int(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Symmetric congruence diagonalization: returns `(P, d)` with
/// `P * gram * P^T = diag(d)`. Rows of `P` form an orthogonal basis.
pub fn diagonalize(gram: &RatMatrix) -> (RatMatrix, Vec<Rational>) {
    let n = gram.len();
    let mut a = gram.clone();
    let mut p: RatMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rat(1) } else { rat(0) })
                .collect()
        })
        .collect();
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
                p.swap(k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // row_k += row_j, col_k += col_j
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
                for c in 0..n {
                    let v = p[j][c].clone();
                    p[k][c] += v;
                }
            } else {
                continue;
            }
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let c = &a[i][k] / &pivot;
            for col in 0..n {
                let v = &c * &a[k][col];
                a[i][col] -= v;
            }
            for row in 0..n {
                let v = &c * &a[row][k];
                a[row][i] -= v;
            }
            for col in 0..n {
                let v = &c * &p[k][col];
                p[i][col] -= v;
            }
        }
    }
    let d = (0..n).map(|i| a[i][i].clone()).collect();
    (p, d)
}

/// `(positive, negative, zero)` counts of the form.
pub fn inertia(gram: &RatMatrix) -> (usize, usize, usize) {
    let (_, d) = diagonalize(gram);
    let pos = d.iter().filter(|x| x.is_positive()).count();
    let neg = d.iter().filter(|x| x.is_negative()).count();
    (pos, neg, d.len() - pos - neg)
}

/// Leading principal minors `det(m[..k][..k])` for `k = 1..=n`.
pub fn leading_minors(m: &RatMatrix) -> Vec<Rational> {
    let n = m.len();
    let mut a = m.clone();
    let mut out = Vec::with_capacity(n);
    let mut acc = rat(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            // singular leading block; later minors are computed directly
            out.push(rat(0));
            for kk in k + 1..n {
                let sub: RatMatrix = (0..=kk).map(|i| m[i][..=kk].to_vec()).collect();
                out.push(det_rat(&sub));
            }
            return out;
        }
        acc *= &a[k][k];
        out.push(acc.clone());
        for i in k + 1..n {
            let c = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &c * &a[k][j];
                a[i][j] -= v;
            }
        }
    }
    out
}

pub fn det_rat(m: &RatMatrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = rat(1);
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return rat(0);
        };
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= &a[k][k];
        for i in k + 1..n {
            let c = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &c * &a[k][j];
                a[i][j] -= v;
            }
        }
    }
    det
}

pub fn is_positive_definite(m: &RatMatrix) -> bool {
    leading_minors(m).iter().all(|x| x.is_positive())
}

pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut a: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { rat(1) } else { rat(0) }));
            r
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(piv, k);
        let inv = a[k][k].recip();
        for x in a[k].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != k && !a[i][k].is_zero() {
                let c = a[i][k].clone();
                for j in 0..2 * n {
                    let v = &c * &a[k][j];
                    a[i][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Quadratic-completion form of a positive definite matrix:
/// `x^T q x = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2`.
/// Returns `None` when `q` is not positive definite.
pub fn completion(q: &RatMatrix) -> Option<(Vec<Rational>, RatMatrix)> {
    let n = q.len();
    let mut a = q.clone();
    for i in 0..n {
        if !a[i][i].is_positive() {
            return None;
        }
        for j in i + 1..n {
            let v = &a[i][j] / &a[i][i];
            a[j][i] = a[i][j].clone();
            a[i][j] = v;
        }
        for k in i + 1..n {
            for l in k..n {
                let v = &a[k][i] * &a[i][l];
                a[k][l] -= v;
            }
        }
    }
    let d = (0..n).map(|i| a[i][i].clone()).collect();
    let u = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if j > i { a[i][j].clone() } else { rat(0) })
                .collect()
        })
        .collect();
    Some((d, u))
}

/// Integers `c` with `sum c_i a_i = gcd(a)`, by folding the extended Euclid.
pub fn bezout(a: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut coeffs = vec![BigInt::zero(); a.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let e = g.extended_gcd(x);
        // new g = e.x * g + e.y * x
        for c in coeffs.iter_mut().take(i) {
            *c *= &e.x;
        }
        coeffs[i] = e.y.clone();
        g = e.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -c.clone();
        }
    }
    (g, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_small_matrices() {
        assert_eq!(det_int(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(det_int(&[vec![2, 1], vec![1, 2]]), BigInt::from(3));
        assert_eq!(
            det_int(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]),
            BigInt::from(-1)
        );
    }

    #[test]
    fn diagonalize_hyperbolic_plane() {
        let g = to_rational(&[vec![0, 1], vec![1, 0]]);
        let (p, d) = diagonalize(&g);
        assert_eq!(inertia(&g), (1, 1, 0));
        for i in 0..2 {
            for j in 0..2 {
                let mut s = rat(0);
                for a in 0..2 {
                    for b in 0..2 {
                        s += &p[i][a] * &g[a][b] * &p[j][b];
                    }
                }
                let want = if i == j { d[i].clone() } else { rat(0) };
                assert_eq!(s, want);
            }
        }
    }

    #[test]
    fn minors_and_inverse() {
        let m = to_rational(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(leading_minors(&m), vec![rat(2), rat(3)]);
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0][0], crate::rational::rat_frac(2, 3));
        assert!(!is_positive_definite(&to_rational(&[
            vec![0, 1],
            vec![1, 0]
        ])));
    }

    #[test]
    fn bezout_combination() {
        let a: Vec<BigInt> = [6, 10, 15].iter().map(|&x| BigInt::from(x)).collect();
        let (g, c) = bezout(&a);
        assert_eq!(g, BigInt::one());
        let s: BigInt = a.iter().zip(&c).map(|(x, y)| x * y).sum();
        assert_eq!(s, BigInt::one());
    }
}
