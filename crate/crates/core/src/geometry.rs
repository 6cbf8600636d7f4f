//! Paths and path sets through a block circuit, their lengths and head
//! widths, and a search for the legal path set of smallest exponent
//! `E = 2 l + w`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{qubits_of, QubitMask};

/// Time-ordered block sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

/// Edge endpoint: `None` is the initial state.
pub type EdgeKey = (Option<usize>, usize);

fn log4(x: f64) -> f64 {
    x.log2() / 2.0
}

fn pow4m1(m: u32) -> f64 {
    4f64.powi(m as i32) - 1.0
}

/// Length of the edge `from -> to`; `from = None` is the head edge, using the
/// forward residual support of `to`.
pub fn edge_length(c: &Circuit, from: Option<usize>, to: usize) -> Result<f64> {
    let target = c.block(to)?.support().count_ones();
    let shared = match from {
        None => {
            let sf = c.forward_residual_support(to)?;
            if sf == 0 {
                return Err(Error::NotAHead(to));
            }
            sf
        }
        Some(k) => {
            if k >= to {
                return Err(Error::InvalidPath(format!("edge {k} -> {to} is not time-ordered")));
            }
            let sc = c.connecting_support(k, to)?;
            if sc == 0 {
                return Err(Error::NotAnEdge(k, to));
            }
            sc
        }
    };
    Ok(log4(pow4m1(target) / pow4m1(shared.count_ones())))
}

/// Forward width `log2[(4^m - 1)/(2^m - 1)]`, `m = |s_f(B_k)|`.
pub fn head_width(c: &Circuit, k: usize) -> Result<f64> {
    let m = c.forward_residual_support(k)?.count_ones();
    if m == 0 {
        return Err(Error::NotAHead(k));
    }
    Ok((pow4m1(m) / (2f64.powi(m as i32) - 1.0)).log2())
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Self {
        PathSet { paths }
    }

    /// De-duplicated edges including the head edges.
    pub fn edges(&self) -> BTreeSet<EdgeKey> {
        let mut e = BTreeSet::new();
        for p in &self.paths {
            if let Some(&h) = p.blocks.first() {
                e.insert((None, h));
            }
            for w in p.blocks.windows(2) {
                e.insert((Some(w[0]), w[1]));
            }
        }
        e
    }

    pub fn heads(&self) -> BTreeSet<usize> {
        self.paths.iter().filter_map(|p| p.blocks.first().copied()).collect()
    }

    pub fn nodes(&self) -> BTreeSet<usize> {
        self.paths.iter().flat_map(|p| p.blocks.iter().copied()).collect()
    }

    pub fn length(&self, c: &Circuit) -> Result<f64> {
        self.edges().into_iter().map(|(a, b)| edge_length(c, a, b)).sum()
    }

    pub fn width(&self, c: &Circuit) -> Result<f64> {
        self.heads().into_iter().map(|k| head_width(c, k)).sum()
    }

    /// `E = 2 l + w`.
    pub fn exponent(&self, c: &Circuit) -> Result<f64> {
        Ok(2.0 * self.length(c)? + self.width(c)?)
    }

    /// Union of backward residual supports over all blocks on the paths.
    pub fn backward_support(&self, c: &Circuit) -> Result<QubitMask> {
        self.nodes().into_iter().try_fold(0, |m, k| Ok(m | c.backward_residual_support(k)?))
    }

    /// Checks time order, connectivity, traversal, pass-through and coverage.
    /// The path through `differential` must itself meet the observable.
    pub fn validate(&self, c: &Circuit, differential: usize, observable: QubitMask) -> Result<()> {
        if self.paths.is_empty() {
            return Err(Error::InvalidPath("empty path set".into()));
        }
        for (i, p) in self.paths.iter().enumerate() {
            let (Some(&head), Some(&tail)) = (p.blocks.first(), p.blocks.last()) else {
                return Err(Error::InvalidPath(format!("path {i} is empty")));
            };
            for w in p.blocks.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidPath(format!("path {i} is not strictly increasing")));
                }
                if c.connecting_support(w[0], w[1])? == 0 {
                    return Err(Error::InvalidPath(format!("path {i}: blocks {} and {} not connected", w[0], w[1])));
                }
            }
            if c.forward_residual_support(head)? == 0 {
                return Err(Error::InvalidPath(format!("path {i} starts at non-head block {head}")));
            }
            if c.backward_residual_support(tail)? == 0 {
                return Err(Error::InvalidPath(format!("path {i} ends at non-tail block {tail}")));
            }
        }
        let reaches = |p: &Path| -> Result<bool> {
            let mut sb = 0;
            for &k in &p.blocks {
                sb |= c.backward_residual_support(k)?;
            }
            Ok(sb & observable != 0)
        };
        let mut through = false;
        for p in self.paths.iter().filter(|p| p.blocks.contains(&differential)) {
            through |= reaches(p)?;
        }
        if !through {
            return Err(Error::InvalidPath(format!(
                "no path passes through block {differential} and reaches the observable"
            )));
        }
        let missing = observable & !self.backward_support(c)?;
        if missing != 0 {
            return Err(Error::InvalidPath(format!("qubits {:?} not covered", qubits_of(missing))));
        }
        Ok(())
    }
}

/// One path per observable qubit: every block acting on that qubit, in order.
pub fn straight_wire_path_set(c: &Circuit, observable: QubitMask) -> PathSet {
    let mut paths: Vec<Path> = qubits_of(observable)
        .into_iter()
        .map(|q| Path {
            blocks: (0..c.num_blocks()).filter(|&k| c.blocks()[k].support() >> q & 1 == 1).collect(),
        })
        .filter(|p| !p.blocks.is_empty())
        .collect();
    paths.dedup();
    PathSet { paths }
}

/// Largest number of distinct covering tail blocks handled by the exact search.
pub const MAX_EXACT_TERMINALS: usize = 10;

#[derive(Clone, Copy)]
enum Choice {
    None,
    Reduce(usize),
    Edge(usize),
    Split(usize),
}

/// Legal path set of minimum exponent through `differential` covering
/// `observable`, or `None` when the block lies outside the causal cone.
///
/// The optimum over unions of paths is attained by an arborescence rooted at
/// the initial state whose leaves are tail blocks; it is found with a
/// Dreyfus-Wagner recursion over terminal subsets. Terminals are the last
/// blocks on each observable qubit plus markers for the path through the
/// differential block, which must itself touch a covering block either below
/// or above the differential block. Above [`MAX_EXACT_TERMINALS`] terminals
/// the straight-wire set is returned instead.
pub fn find_path_set(c: &Circuit, differential: usize, observable: QubitMask) -> Option<PathSet> {
    if differential >= c.num_blocks() || !c.causal_cone_blocks(observable).contains(&differential) {
        return None;
    }
    if observable & !c.support() != 0 {
        return None;
    }
    let mut tails: Vec<usize> = qubits_of(observable).into_iter().filter_map(|q| c.last_block_on(q)).collect();
    tails.sort_unstable();
    tails.dedup();
    if tails.len() > MAX_EXACT_TERMINALS {
        let wires = straight_wire_path_set(c, observable);
        return wires.validate(c, differential, observable).ok().map(|_| wires);
    }
    Some(steiner_search(c, differential, &tails))
}

/// Bit layout: one bit per covering block, then `any_tail` (some tail below),
/// `pending` (differential block below, still needing a covering ancestor)
/// and `through` (the differential-block requirement is met).
fn steiner_search(c: &Circuit, differential: usize, tails: &[usize]) -> PathSet {
    let m = c.num_blocks();
    let root = m;
    let kt = tails.len();
    let any_tail = 1usize << kt;
    let pending = 1usize << (kt + 1);
    let through = 1usize << (kt + 2);
    let states = 1usize << (kt + 3);

    let is_tail: Vec<bool> = (0..m).map(|k| c.backward_residual_support(k).map(|s| s != 0).unwrap_or(false)).collect();
    let mut succ: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m + 1];
    for (v, out) in succ.iter_mut().enumerate().take(m) {
        let sv = c.blocks()[v].support();
        let mut between = 0;
        for u in v + 1..m {
            let su = c.blocks()[u].support();
            if sv & su & !between != 0 {
                out.push((u, 2.0 * edge_length(c, Some(v), u).expect("connected pair")));
            }
            between |= su;
        }
    }
    for u in 0..m {
        if let Ok(w) = head_width(c, u) {
            succ[root].push((u, 2.0 * edge_length(c, None, u).expect("head block") + w));
        }
    }

    let mut cost = vec![vec![f64::INFINITY; states]; m + 1];
    let mut choice = vec![vec![Choice::None; states]; m + 1];
    const EPS: f64 = 1e-12;
    let order: Vec<usize> = (0..m).rev().chain(std::iter::once(root)).collect();
    for &v in &order {
        let mut free = 0usize;
        let mut covering = false;
        if v < m {
            for (i, &t) in tails.iter().enumerate() {
                if t == v {
                    free |= 1 << i;
                    covering = true;
                }
            }
            if is_tail[v] {
                free |= any_tail;
            }
        }
        cost[v][0] = 0.0;
        for s in 1..states {
            let mut best = f64::INFINITY;
            let mut how = Choice::None;
            let offer = |val: f64, ch: Choice, best: &mut f64, how: &mut Choice| {
                if val < *best - EPS {
                    *best = val;
                    *how = ch;
                }
            };
            if s & free != 0 {
                let prev = s & !free;
                offer(cost[v][prev], Choice::Reduce(prev), &mut best, &mut how);
            }
            if v == differential {
                if s & through != 0 {
                    for i in 0..kt {
                        let prev = (s & !through) | (1 << i);
                        offer(cost[v][prev], Choice::Reduce(prev), &mut best, &mut how);
                    }
                }
                if s & pending != 0 {
                    let prev = (s & !pending) | any_tail;
                    offer(cost[v][prev], Choice::Reduce(prev), &mut best, &mut how);
                }
            }
            if covering && s & through != 0 {
                let prev = (s & !through) | pending;
                offer(cost[v][prev], Choice::Reduce(prev), &mut best, &mut how);
            }
            for &(u, w) in &succ[v] {
                offer(w + cost[u][s], Choice::Edge(u), &mut best, &mut how);
            }
            let low = s & s.wrapping_neg();
            let mut splits = Vec::new();
            let mut sub = (s - 1) & s;
            while sub != 0 {
                if sub & low != 0 {
                    splits.push(sub);
                }
                sub = (sub - 1) & s;
            }
            splits.sort_unstable();
            for s1 in splits {
                offer(cost[v][s1] + cost[v][s & !s1], Choice::Split(s1), &mut best, &mut how);
            }
            cost[v][s] = best;
            choice[v][s] = how;
        }
    }

    let all = any_tail - 1;
    let target = if cost[root][all | through] <= cost[root][all | through | any_tail] + EPS {
        all | through
    } else {
        all | through | any_tail
    };
    let mut children: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m + 1];
    let mut stack = vec![(root, target)];
    while let Some((v, s)) = stack.pop() {
        if s == 0 {
            continue;
        }
        match choice[v][s] {
            Choice::None => unreachable!("unsatisfiable terminal set in path search"),
            Choice::Reduce(p) => stack.push((v, p)),
            Choice::Edge(u) => {
                children[v].insert(u);
                stack.push((u, s));
            }
            Choice::Split(s1) => {
                stack.push((v, s1));
                stack.push((v, s & !s1));
            }
        }
    }
    let mut paths = Vec::new();
    let mut walk = vec![(root, Vec::new())];
    while let Some((v, prefix)) = walk.pop() {
        if v != root && children[v].is_empty() {
            paths.push(Path { blocks: prefix });
            continue;
        }
        for &u in children[v].iter().rev() {
            let mut next = prefix.clone();
            next.push(u);
            walk.push((u, next));
        }
    }
    paths.sort();
    PathSet { paths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Block, BlockKind, Gate};
    use crate::pauli::{mask_of, PauliString};

    fn block(n: usize, qs: &[usize], p: usize) -> Block {
        let letters: String = qs.iter().map(|_| 'Z').collect();
        let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
        let g = PauliString::parse(&format!("{letters}@[{}]", list.join(",")), Some(n)).unwrap();
        Block::new(vec![Gate::param(g, p).unwrap()], BlockKind::Design2).unwrap()
    }

    fn ladder(n: usize) -> Circuit {
        Circuit::new(n, (0..n - 1).map(|i| block(n, &[i, i + 1], i)).collect()).unwrap()
    }

    #[test]
    fn edge_lengths() {
        let c = ladder(4);
        let l = edge_length(&c, Some(0), 1).unwrap();
        assert!((l - 5f64.ln() / 4f64.ln()).abs() < 1e-15);
        assert!((l - 1.1610).abs() < 1e-4);
        assert_eq!(edge_length(&c, None, 0).unwrap(), 0.0);
        assert!(edge_length(&c, Some(0), 2).is_err());
        let full = Circuit::new(2, vec![block(2, &[0, 1], 0), block(2, &[0, 1], 1)]).unwrap();
        assert_eq!(edge_length(&full, Some(0), 1).unwrap(), 0.0);
    }

    #[test]
    fn widths() {
        let c = ladder(4);
        assert!((head_width(&c, 1).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!((head_width(&c, 0).unwrap() - 5f64.log2()).abs() < 1e-15);
        let two_heads = PathSet::new(vec![Path { blocks: vec![1] }, Path { blocks: vec![2] }]);
        assert!((two_heads.width(&c).unwrap() - 2.0 * 3f64.log2()).abs() < 1e-15);
        let c2 = Circuit::new(2, vec![block(2, &[0, 1], 0), block(2, &[0, 1], 1)]).unwrap();
        assert!(head_width(&c2, 1).is_err());
    }

    #[test]
    fn path_set_lengths() {
        let c = ladder(4);
        let single = PathSet::new(vec![Path { blocks: vec![1] }]);
        assert!((single.length(&c).unwrap() - edge_length(&c, None, 1).unwrap()).abs() < 1e-15);
        let p = PathSet::new(vec![Path { blocks: vec![0, 1, 2] }]);
        assert!((p.length(&c).unwrap() - 2.0 * 5f64.ln() / 4f64.ln()).abs() < 1e-14);
        let dup = PathSet::new(vec![Path { blocks: vec![0, 1, 2] }, Path { blocks: vec![0, 1, 2] }]);
        assert_eq!(dup.length(&c).unwrap(), p.length(&c).unwrap());
    }

    #[test]
    fn search_examples() {
        let one = Circuit::new(2, vec![block(2, &[0, 1], 0)]).unwrap();
        let p = find_path_set(&one, 0, mask_of(&[0])).unwrap();
        assert_eq!(p.paths, vec![Path { blocks: vec![0] }]);
        assert!((p.exponent(&one).unwrap() - 5f64.log2()).abs() < 1e-15);

        let c = ladder(4);
        let p = find_path_set(&c, 0, mask_of(&[3])).unwrap();
        assert_eq!(p.paths, vec![Path { blocks: vec![0, 1, 2] }]);
        assert!((p.length(&c).unwrap() - 2.0 * 5f64.ln() / 4f64.ln()).abs() < 1e-14);
        assert!((p.width(&c).unwrap() - 5f64.log2()).abs() < 1e-15);
        p.validate(&c, 0, mask_of(&[3])).unwrap();

        let split = Circuit::new(4, vec![block(4, &[0, 1], 0), block(4, &[2, 3], 1)]).unwrap();
        assert!(find_path_set(&split, 0, mask_of(&[3])).is_none());
    }
}
