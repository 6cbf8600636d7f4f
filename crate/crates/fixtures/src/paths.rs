//! Exhaustive search over path sets of small circuits.
//!
//! Path sets with the same edge union share their length and head width, so
//! each edge subset is represented by the set of every head-to-tail path it
//! contains. A subset is kept when each of its edges lies on such a path, the
//! blocks it visits cover the observable through their backward residual
//! supports, and some path through the differential block visits a block
//! whose backward residual support meets the observable.

use bpscope_core::circuit::Circuit;
use bpscope_core::geometry::{Path, PathSet};
use bpscope_core::pauli::QubitMask;
use bpscope_core::{Error, Result};

pub const MAX_ENUM_BLOCKS: usize = 6;
pub const MAX_ENUM_EDGES: usize = 20;

struct Supports {
    block: Vec<QubitMask>,
    forward: Vec<QubitMask>,
    backward: Vec<QubitMask>,
}

impl Supports {
    fn of(c: &Circuit) -> Self {
        let block: Vec<QubitMask> = c.blocks().iter().map(|b| b.support()).collect();
        let m = block.len();
        let forward = (0..m).map(|k| block[k] & !block[..k].iter().fold(0, |a, b| a | b)).collect();
        let backward = (0..m).map(|k| block[k] & !block[k + 1..].iter().fold(0, |a, b| a | b)).collect();
        Supports { block, forward, backward }
    }

    fn connecting(&self, a: usize, b: usize) -> QubitMask {
        self.block[a] & self.block[b] & !self.block[a + 1..b].iter().fold(0, |x, y| x | y)
    }

    fn in_cone(&self, k: usize, observable: QubitMask) -> bool {
        let mut active = observable;
        for j in (k..self.block.len()).rev() {
            if self.block[j] & active != 0 {
                if j == k {
                    return true;
                }
                active |= self.block[j];
            }
        }
        false
    }
}

fn log4(x: f64) -> f64 {
    x.ln() / 4f64.ln()
}

fn exponent(sup: &Supports, edges: &[(Option<usize>, usize)]) -> f64 {
    let mut length = 0.0;
    let mut width = 0.0;
    for &(from, to) in edges {
        let target = 4f64.powi(sup.block[to].count_ones() as i32) - 1.0;
        let shared = match from {
            None => sup.forward[to],
            Some(a) => sup.connecting(a, to),
        };
        length += log4(target / (4f64.powi(shared.count_ones() as i32) - 1.0));
        if from.is_none() {
            let m = sup.forward[to].count_ones() as i32;
            width += ((4f64.powi(m) - 1.0) / (2f64.powi(m) - 1.0)).log2();
        }
    }
    2.0 * length + width
}

fn head_to_tail_paths(sup: &Supports, edges: &[(Option<usize>, usize)]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> =
        edges.iter().filter(|(f, _)| f.is_none()).map(|&(_, h)| vec![h]).collect();
    while let Some(p) = stack.pop() {
        let last = *p.last().expect("nonempty");
        if sup.backward[last] != 0 {
            out.push(p.clone());
        }
        for &(f, t) in edges {
            if f == Some(last) {
                let mut q = p.clone();
                q.push(t);
                stack.push(q);
            }
        }
    }
    out.sort();
    out
}

/// Every legal path set up to edge-union equivalence, with `E = 2l + w`.
/// Empty when the differential block lies outside the causal cone.
pub fn enumerate_path_sets(c: &Circuit, differential: usize, observable: QubitMask) -> Result<Vec<(PathSet, f64)>> {
    let m = c.num_blocks();
    if m > MAX_ENUM_BLOCKS {
        return Err(Error::SizeLimit(format!("enumeration handles at most {MAX_ENUM_BLOCKS} blocks, got {m}")));
    }
    if differential >= m {
        return Err(Error::BlockOutOfRange { index: differential, blocks: m });
    }
    let sup = Supports::of(c);
    if !sup.in_cone(differential, observable) {
        return Ok(Vec::new());
    }
    let mut candidates: Vec<(Option<usize>, usize)> = (0..m).filter(|&k| sup.forward[k] != 0).map(|k| (None, k)).collect();
    for a in 0..m {
        for b in a + 1..m {
            if sup.connecting(a, b) != 0 {
                candidates.push((Some(a), b));
            }
        }
    }
    if candidates.len() > MAX_ENUM_EDGES {
        return Err(Error::SizeLimit(format!("{} candidate edges exceed {MAX_ENUM_EDGES}", candidates.len())));
    }
    let mut out = Vec::new();
    for subset in 1u32..1 << candidates.len() {
        let edges: Vec<_> = (0..candidates.len()).filter(|i| subset >> i & 1 == 1).map(|i| candidates[i]).collect();
        let paths = head_to_tail_paths(&sup, &edges);
        let used: std::collections::BTreeSet<_> = paths
            .iter()
            .flat_map(|p| {
                std::iter::once((None, p[0])).chain(p.windows(2).map(|w| (Some(w[0]), w[1]))).collect::<Vec<_>>()
            })
            .collect();
        if used.len() != edges.len() {
            continue;
        }
        let covered = paths.iter().flatten().fold(0, |acc, &k| acc | sup.backward[k]);
        if observable & !covered != 0 {
            continue;
        }
        let through = paths.iter().any(|p| {
            p.contains(&differential) && p.iter().fold(0, |acc, &k| acc | sup.backward[k]) & observable != 0
        });
        if !through {
            continue;
        }
        let e = exponent(&sup, &edges);
        out.push((PathSet::new(paths.into_iter().map(|blocks| Path { blocks }).collect()), e));
    }
    Ok(out)
}
