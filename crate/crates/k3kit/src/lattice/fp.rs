//! Fincke–Pohst enumeration of short vectors of a positive definite integer
//! form. The branch bounds come from an exact quadratic completion converted
//! to `f64` and widened by a small margin; every accepted leaf is re-checked
//! with exact integer arithmetic, so no vector is lost or invented.

use rayon::prelude::*;

use super::linalg::{completion, to_rational};
use crate::rational::to_f64;

pub struct ShortVectors {
    n: usize,
    gram: Vec<Vec<i64>>,
    d: Vec<f64>,
    u: Vec<Vec<f64>>,
}

struct Walk<'a, F: FnMut(&[i64], i128)> {
    sv: &'a ShortVectors,
    bound: i128,
    fbound: f64,
    x: Vec<i64>,
    visit: F,
}

impl ShortVectors {
    /// `None` if `gram` is not positive definite.
    pub fn new(gram: Vec<Vec<i64>>) -> Option<Self> {
        let (d, u) = completion(&to_rational(&gram))?;
        let n = gram.len();
        Some(Self {
            n,
            d: d.iter().map(to_f64).collect(),
            u: u.iter().map(|r| r.iter().map(to_f64).collect()).collect(),
            gram,
        })
    }

    fn range(&self, i: usize, x: &[i64], partial: f64, fbound: f64) -> (i64, i64, f64) {
        let mut c = 0.0;
        for j in i + 1..self.n {
            c -= self.u[i][j] * x[j] as f64;
        }
        let room = (fbound - partial).max(0.0);
        let r = (room / self.d[i]).sqrt() + 1e-9;
        ((c - r).ceil() as i64, (c + r).floor() as i64, c)
    }

    fn margin(bound: i128) -> f64 {
        bound as f64 * (1.0 + 1e-9) + 1e-7
    }

    /// Visits every `x` with `x^T G x <= bound`, ascending in the last
    /// coordinate first, passing the exact norm.
    pub fn for_each(&self, bound: i128, mut visit: impl FnMut(&[i64], i128)) {
        if bound < 0 {
            return;
        }
        if self.n == 0 {
            visit(&[], 0);
            return;
        }
        let mut w = Walk {
            sv: self,
            bound,
            fbound: Self::margin(bound),
            x: vec![0; self.n],
            visit,
        };
        w.level(self.n - 1, 0.0, 0);
    }

    fn top_values(&self, bound: i128) -> Vec<i64> {
        let n = self.n;
        let (lo, hi, _) = self.range(n - 1, &vec![0; n], 0.0, Self::margin(bound));
        (lo..=hi).collect()
    }

    fn fixed_top(&self, top: i64, bound: i128, visit: impl FnMut(&[i64], i128)) {
        let n = self.n;
        let mut w = Walk {
            sv: self,
            bound,
            fbound: Self::margin(bound),
            x: vec![0; n],
            visit,
        };
        let partial = self.d[n - 1] * (top as f64).powi(2);
        if partial > w.fbound {
            return;
        }
        w.x[n - 1] = top;
        let exact = self.gram[n - 1][n - 1] as i128 * top as i128 * top as i128;
        if n == 1 {
            if exact <= bound {
                (w.visit)(&w.x, exact);
            }
            return;
        }
        w.level(n - 2, partial, exact);
    }

    /// All vectors of norm `<= bound`, in enumeration order. Work is split on
    /// the last coordinate and merged back in order.
    pub fn collect(&self, bound: i128) -> Vec<(Vec<i64>, i128)> {
        if self.n < 2 {
            let mut out = Vec::new();
            self.for_each(bound, |x, q| out.push((x.to_vec(), q)));
            return out;
        }
        self.top_values(bound)
            .into_par_iter()
            .map(|t| {
                let mut out = Vec::new();
                self.fixed_top(t, bound, |x, q| out.push((x.to_vec(), q)));
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    /// `counts[k]` = number of vectors of norm exactly `k`, for `k <= max`.
    pub fn norm_counts(&self, max: usize) -> Vec<u64> {
        let bound = max as i128;
        let tally = |t: Option<i64>| {
            let mut h = vec![0u64; max + 1];
            let add = |_: &[i64], q: i128| h[q as usize] += 1;
            match t {
                Some(t) => self.fixed_top(t, bound, add),
                None => self.for_each(bound, add),
            }
            h
        };
        if self.n < 2 {
            return tally(None);
        }
        self.top_values(bound)
            .into_par_iter()
            .map(|t| tally(Some(t)))
            .reduce(
                || vec![0u64; max + 1],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    }

    /// Integer points `x` with `(x - t)^T G (x - t) <= bound` up to the float
    /// margin; callers confirm exactly.
    pub fn near(&self, target: &[f64], bound: f64, mut visit: impl FnMut(&[i64])) {
        let n = self.n;
        if n == 0 {
            visit(&[]);
            return;
        }
        let fb = bound * (1.0 + 1e-9) + 1e-7;
        let mut x = vec![0i64; n];
        self.near_level(n - 1, 0.0, target, fb, &mut x, &mut visit);
    }

    fn near_level(
        &self,
        i: usize,
        partial: f64,
        t: &[f64],
        fb: f64,
        x: &mut Vec<i64>,
        visit: &mut impl FnMut(&[i64]),
    ) {
        let mut c = t[i];
        for j in i + 1..self.n {
            c -= self.u[i][j] * (x[j] as f64 - t[j]);
        }
        let r = ((fb - partial).max(0.0) / self.d[i]).sqrt() + 1e-9;
        for xi in (c - r).ceil() as i64..=(c + r).floor() as i64 {
            let p = partial + self.d[i] * (xi as f64 - c).powi(2);
            if p > fb {
                continue;
            }
            x[i] = xi;
            if i == 0 {
                visit(x);
            } else {
                self.near_level(i - 1, p, t, fb, x, visit);
            }
        }
    }
}

impl<F: FnMut(&[i64], i128)> Walk<'_, F> {
    fn level(&mut self, i: usize, partial: f64, exact: i128) {
        let sv = self.sv;
        let (lo, hi, c) = sv.range(i, &self.x, partial, self.fbound);
        // cross term with the coordinates already fixed
        let mut s = 0i128;
        for j in i + 1..sv.n {
            s += sv.gram[i][j] as i128 * self.x[j] as i128;
        }
        let gii = sv.gram[i][i] as i128;
        for xi in lo..=hi {
            let t = xi as f64 - c;
            let p = partial + sv.d[i] * t * t;
            if p > self.fbound {
                continue;
            }
            let e = exact + xi as i128 * (gii * xi as i128 + 2 * s);
            self.x[i] = xi;
            if i == 0 {
                if e <= self.bound {
                    (self.visit)(&self.x, e);
                }
            } else {
                self.level(i - 1, p, e);
            }
        }
        self.x[i] = 0;
    }
}
