//! Sorting roots of a polarized lattice into the components of the
//! discriminant: roots orthogonal to `l`, and roots that the stabilizer of `l`
//! carries onto `+-(e1 - e2)`, whose projection to `l^perp` is a multiple of
//! `l* = e1 - n e2`.
//!
//! Only pairings `<delta, l> = +-(n - 1)` can reach that normal form, since the
//! stabilizer preserves the pairing; others are rejected up front. The search
//! is best-first over a fixed pool of stabilizer elements, ordered by a
//! positive height that vanishes exactly at the target.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{require_root, BlockMove, Generator, IsometryWord, OrbitError, ReductionCertificate};
use crate::lattice::{orthogonal_complement, pair, Lattice, LatticeVector, Summand};
use crate::rational::{rat, rat_frac, Rational};

pub const SEARCH_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentTag {
    PerpRoot,
    LstarComponent,
}

impl fmt::Display for ComponentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerpRoot => "perp-root",
            Self::LstarComponent => "lstar-component",
        })
    }
}

#[derive(Debug, Clone)]
pub struct DiscriminantReport {
    pub tag: ComponentTag,
    pub certificate: ReductionCertificate,
    /// For `lstar-component`: the `k` with projection `k l*`.
    pub lstar_coefficient: Option<Rational>,
}

/// A pool element with a sparse integer matrix (`x -> x M`).
struct Move {
    gen: Generator,
    rows: Vec<Vec<(usize, i128)>>,
}

impl Move {
    fn new(lat: &Lattice, gen: Generator) -> Result<Self, OrbitError> {
        let word = IsometryWord::new(lat, vec![gen.clone()])?;
        let rows = word
            .matrix()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.to_i128().expect("small pool entries")))
                    .collect()
            })
            .collect();
        Ok(Self { gen, rows })
    }

    fn apply(&self, x: &[i128]) -> Option<Vec<i128>> {
        let mut out = vec![0i128; x.len()];
        for (i, row) in self.rows.iter().enumerate() {
            if x[i] == 0 {
                continue;
            }
            for &(j, v) in row {
                out[j] = out[j].checked_add(x[i].checked_mul(v)?)?;
            }
        }
        Some(out)
    }
}

fn unit(n: usize, i: usize, k: i64) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); n];
    e[i] = BigInt::from(k);
    e
}

/// Stabilizer elements of `l = e1 + n e2` living in summand `ls`.
fn stabilizer_pool(lat: &Lattice, ls: usize, n: i64) -> Result<Vec<Move>, OrbitError> {
    let rank = lat.rank();
    let blocks: Vec<(usize, Summand)> = lat.blocks().collect();
    let lo = blocks[ls].0;
    let mut lstar = vec![BigInt::zero(); rank];
    lstar[lo] = BigInt::from(1);
    lstar[lo + 1] = BigInt::from(-n);
    let others: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .filter(|(i, (_, s))| *i != ls && *s == Summand::Hyperbolic)
        .map(|(i, (o, _))| (i, *o))
        .collect();
    let roots: Vec<usize> = blocks
        .iter()
        .filter(|(_, s)| *s != Summand::Hyperbolic)
        .flat_map(|(o, s)| *o..*o + s.rank())
        .filter(|&j| lat.gram()[j][j] == -2)
        .collect();

    let mut gens = Vec::new();
    for &j in &roots {
        gens.push(Generator::Reflection {
            root: unit(rank, j, 1),
        });
    }
    for &(i, o) in &others {
        let mut r = unit(rank, o, 1);
        r[o + 1] = BigInt::from(-1);
        gens.push(Generator::Reflection { root: r });
        gens.push(Generator::Block(BlockMove::Flip(i)));
        for k0 in [1i64, -1, 2, -2] {
            // k0 l* + f1 + (n k0^2 - 1) f2 has norm -2
            let mut r: Vec<BigInt> = lstar.iter().map(|c| c * k0).collect();
            r[o] = BigInt::from(1);
            r[o + 1] = BigInt::from(n * k0 * k0 - 1);
            gens.push(Generator::Reflection { root: r });
        }
        let mut lambdas = vec![lstar.clone(), lstar.iter().map(|c| -c).collect()];
        for &(_, p) in others.iter().filter(|(_, p)| *p != o) {
            for k in [1, -1] {
                lambdas.push(unit(rank, p, k));
                lambdas.push(unit(rank, p + 1, k));
            }
        }
        for &j in &roots {
            for k in [1, -1] {
                lambdas.push(unit(rank, j, k));
            }
        }
        for lambda in lambdas {
            gens.push(Generator::Transvection { lambda, split: i });
        }
    }
    for a in 0..others.len() {
        for b in a + 1..others.len() {
            gens.push(Generator::Block(BlockMove::Swap(others[a].0, others[b].0)));
        }
    }
    gens.into_iter().map(|g| Move::new(lat, g)).collect()
}

struct Height<'a> {
    lat: &'a Lattice,
    lo: usize,
    n: i128,
    t0: i128,
}

impl Height<'_> {
    fn eval(&self, x: &[i128]) -> i128 {
        let mut h = 0i128;
        for (o, s) in self.lat.blocks() {
            if o == self.lo {
                continue;
            }
            match s {
                Summand::Hyperbolic => h += x[o] * x[o] + x[o + 1] * x[o + 1],
                _ => {
                    for i in o..o + s.rank() {
                        for j in o..o + s.rank() {
                            h -= self.lat.gram()[i][j] as i128 * x[i] * x[j];
                        }
                    }
                }
            }
        }
        // <x, l*> = x_{lo+1} - n x_lo
        let t = x[self.lo + 1] - self.n * x[self.lo];
        let d = (t - self.t0) / (2 * self.n);
        h + d * d
    }
}

pub fn discriminant_component(
    delta: &LatticeVector,
    l: &LatticeVector,
    n: i64,
) -> Result<DiscriminantReport, OrbitError> {
    discriminant_component_with_budget(delta, l, n, SEARCH_BUDGET)
}

pub fn discriminant_component_with_budget(
    delta: &LatticeVector,
    l: &LatticeVector,
    n: i64,
    budget: usize,
) -> Result<DiscriminantReport, OrbitError> {
    let x = require_root(delta)?;
    let lat = delta.lattice();
    let comp = orthogonal_complement(l).map_err(|e| OrbitError::BadPolarization(e.to_string()))?;
    if comp.degree != n || n < 1 {
        return Err(OrbitError::BadPolarization(format!(
            "polarization has degree {}, expected {n}",
            comp.degree
        )));
    }
    let c = pair(delta, l)?;
    if c.is_zero() {
        return Ok(DiscriminantReport {
            tag: ComponentTag::PerpRoot,
            certificate: ReductionCertificate {
                input: delta.clone(),
                word: IsometryWord::identity(lat),
                output: delta.clone(),
                steps: 0,
            },
            lstar_coefficient: None,
        });
    }
    let lo = comp.block;
    let sign: i64 = if c == rat(n - 1) {
        1
    } else if c == rat(1 - n) {
        -1
    } else {
        return Err(OrbitError::LstarUnreachable {
            pairing: crate::rational::format_rational(&c),
            degree: n,
        });
    };
    let mut target = vec![0i128; lat.rank()];
    target[lo] = sign as i128;
    target[lo + 1] = -sign as i128;
    let ls = lat
        .blocks()
        .position(|(o, _)| o == lo)
        .expect("block exists");
    let pool = stabilizer_pool(lat, ls, n)?;
    let height = Height {
        lat,
        lo,
        n: n as i128,
        t0: (target[lo + 1] - n as i128 * target[lo]),
    };

    let start: Vec<i128> = x
        .iter()
        .map(|c| c.to_i128())
        .collect::<Option<_>>()
        .ok_or_else(|| OrbitError::BadGenerator("coordinates too large for the search".into()))?;
    let mut states: Vec<(Vec<i128>, usize, usize)> = vec![(start.clone(), usize::MAX, usize::MAX)];
    let mut seen: HashSet<Vec<i128>> = HashSet::from([start.clone()]);
    let mut heap = BinaryHeap::from([Reverse((height.eval(&start), 0usize))]);
    let mut expanded = 0usize;
    let found = loop {
        let Some(Reverse((h, id))) = heap.pop() else {
            return Err(OrbitError::BudgetExceeded(budget));
        };
        if h == 0 {
            break id;
        }
        if expanded >= budget {
            return Err(OrbitError::BudgetExceeded(budget));
        }
        expanded += 1;
        let cur = states[id].0.clone();
        for (k, mv) in pool.iter().enumerate() {
            let Some(next) = mv.apply(&cur) else { continue };
            if seen.insert(next.clone()) {
                let hn = height.eval(&next);
                states.push((next, id, k));
                heap.push(Reverse((hn, states.len() - 1)));
            }
        }
    };

    let mut path = Vec::new();
    let mut id = found;
    while states[id].1 != usize::MAX {
        path.push(pool[states[id].2].gen.clone());
        id = states[id].1;
    }
    path.reverse();
    let word = IsometryWord::new(lat, path)?;
    let output = word.apply(delta)?;
    let out_ints: Vec<i128> = output
        .to_i64()
        .expect("small output")
        .into_iter()
        .map(i128::from)
        .collect();
    debug_assert_eq!(out_ints, target);
    // projection of the output to l^perp is k l*
    let t = pair(&output, &comp.generator)?;
    let k = t / rat(-2 * n);
    let proj = output.add(&l.scale(&(-(c.clone()) / rat(2 * n))))?;
    if proj != comp.generator.scale(&k) {
        return Err(OrbitError::BadGenerator("projection check failed".into()));
    }
    debug_assert_eq!(k, rat_frac(sign * (n + 1), 2 * n));
    let steps = word.len();
    Ok(DiscriminantReport {
        tag: ComponentTag::LstarComponent,
        certificate: ReductionCertificate {
            input: delta.clone(),
            word,
            output,
            steps,
        },
        lstar_coefficient: Some(k),
    })
}
