//! Analytic lower bounds on the gradient variance from circuit geometry.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::geometry::{find_path_set, PathSet};
use crate::models::Hamiltonian;
use crate::pauli::qubits_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Theorem1,
    Theorem2,
    Ladder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermBound {
    pub term_index: usize,
    pub path_set: Option<PathSet>,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub param_index: usize,
    pub per_term: Vec<TermBound>,
    pub total: f64,
    /// The bounds assume the differential gate sits strictly inside a 2-design sandwich.
    pub sandwich_assumed: bool,
}

impl BoundReport {
    fn from_terms(kind: BoundKind, param_index: usize, per_term: Vec<TermBound>) -> Self {
        let total = per_term.iter().map(|t| t.contribution).sum();
        BoundReport { kind, param_index, per_term, total, sandwich_assumed: true }
    }
}

fn check(c: &Circuit, h: &Hamiltonian, mu: usize) -> Result<usize> {
    if h.num_qubits() != c.num_qubits() {
        return Err(Error::Dimension(format!(
            "Hamiltonian on {} qubits, circuit on {}",
            h.num_qubits(),
            c.num_qubits()
        )));
    }
    let kd = c.differential_block(mu)?;
    if let Some(k) = c.blocks().iter().position(|b| b.kind() != crate::circuit::BlockKind::Design2) {
        return Err(Error::Assumption(format!("block {k} is not a local 2-design")));
    }
    let outside = h.support() & !c.support();
    if outside != 0 {
        return Err(Error::Assumption(format!(
            "Hamiltonian acts on qubits {:?} outside the circuit support",
            qubits_of(outside)
        )));
    }
    Ok(kd)
}

/// `Σ_j λ_j^2 2^{1 - 2 l(P_j) - w(P_j)}` with `P_j` from [`find_path_set`].
pub fn theorem1_bound(c: &Circuit, h: &Hamiltonian, mu: usize) -> Result<BoundReport> {
    let kd = check(c, h, mu)?;
    let per_term = h
        .terms()
        .iter()
        .enumerate()
        .map(|(j, (lambda, p))| {
            let path_set = find_path_set(c, kd, p.support());
            let contribution = match &path_set {
                Some(ps) => lambda * lambda * 2f64.powf(1.0 - ps.exponent(c)?),
                None => 0.0,
            };
            Ok(TermBound { term_index: j, path_set, contribution })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::from_terms(BoundKind::Theorem1, mu, per_term))
}

/// `4^{-rχβ} Σ_j 2 λ_j^2` over terms touching the differential block.
pub fn theorem2_bound(c: &Circuit, h: &Hamiltonian, mu: usize) -> Result<BoundReport> {
    let kd = check(c, h, mu)?;
    let r = h.range() as f64;
    let chi = c.max_local_depth() as f64;
    let beta = c.max_block_size() as f64;
    let factor = 4f64.powf(-r * chi * beta);
    let sd = c.blocks()[kd].support();
    let per_term = h
        .terms()
        .iter()
        .enumerate()
        .map(|(j, (lambda, p))| TermBound {
            term_index: j,
            path_set: None,
            contribution: if p.support() & sd != 0 { factor * 2.0 * lambda * lambda } else { 0.0 },
        })
        .collect();
    Ok(BoundReport::from_terms(BoundKind::Theorem2, mu, per_term))
}

/// True when consecutive blocks overlap, non-consecutive blocks are disjoint
/// and every block brings at least one new qubit.
pub fn is_ladder_layout(c: &Circuit) -> bool {
    let b = c.blocks();
    if b.is_empty() {
        return false;
    }
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let overlap = b[i].support() & b[j].support() != 0;
            if (j == i + 1) != overlap {
                return false;
            }
        }
    }
    (0..b.len()).all(|k| c.forward_residual_support(k).map(|s| s != 0).unwrap_or(false))
}

/// `Σ_j λ_j^2 2^{1 - 2β(Δ_j + r)}` with `Δ_j = k'(j) - k(μ)` over terms whose
/// last acting block `k'(j)` is not earlier than the differential block.
pub fn ladder_bound(c: &Circuit, h: &Hamiltonian, mu: usize) -> Result<BoundReport> {
    let kd = check(c, h, mu)?;
    if !is_ladder_layout(c) {
        return Err(Error::Layout("circuit is not a ladder layout".into()));
    }
    let r = h.range() as f64;
    let beta = c.max_block_size() as f64;
    let per_term = h
        .terms()
        .iter()
        .enumerate()
        .map(|(j, (lambda, p))| {
            let last = qubits_of(p.support()).into_iter().filter_map(|q| c.last_block_on(q)).max();
            let contribution = match last {
                Some(k) if k >= kd => {
                    let delta = (k - kd) as f64;
                    lambda * lambda * 2f64.powf(1.0 - 2.0 * beta * (delta + r))
                }
                _ => 0.0,
            };
            TermBound { term_index: j, path_set: None, contribution }
        })
        .collect();
    Ok(BoundReport::from_terms(BoundKind::Ladder, mu, per_term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Block, BlockKind, Gate};
    use crate::pauli::PauliString;

    fn zz(n: usize, a: usize, b: usize, p: usize) -> Block {
        let g = PauliString::parse(&format!("ZZ@[{a},{b}]"), Some(n)).unwrap();
        Block::new(vec![Gate::param(g, p).unwrap()], BlockKind::Design2).unwrap()
    }

    fn z(n: usize, q: usize) -> Hamiltonian {
        Hamiltonian::new(n, vec![(1.0, PauliString::single(n, q, crate::pauli::Letter::Z).unwrap())]).unwrap()
    }

    fn ladder(n: usize) -> Circuit {
        Circuit::new(n, (0..n - 1).map(|i| zz(n, i, i + 1, i)).collect()).unwrap()
    }

    #[test]
    fn single_block_values() {
        let c = Circuit::new(2, vec![zz(2, 0, 1, 0)]).unwrap();
        assert!((theorem1_bound(&c, &z(2, 0), 0).unwrap().total - 0.4).abs() < 1e-15);
        assert!((theorem2_bound(&c, &z(2, 0), 0).unwrap().total - 0.125).abs() < 1e-15);
    }

    #[test]
    fn ladder_values() {
        let c = ladder(4);
        let t1 = theorem1_bound(&c, &z(4, 3), 0).unwrap();
        assert!((t1.total - 2.0 / 125.0).abs() < 1e-15);
        assert!(t1.sandwich_assumed);
        let t2 = theorem2_bound(&c, &z(4, 3), 2).unwrap();
        assert!((t2.total - 2.0 / 256.0).abs() < 1e-15);
        assert_eq!(theorem2_bound(&c, &z(4, 3), 0).unwrap().total, 0.0);
        assert!((ladder_bound(&c, &z(4, 3), 2).unwrap().total - 0.125).abs() < 1e-15);
        assert!((ladder_bound(&c, &z(4, 3), 1).unwrap().total - 1.0 / 128.0).abs() < 1e-15);
        assert_eq!(ladder_bound(&c, &z(4, 0), 2).unwrap().total, 0.0);
    }

    #[test]
    fn layout_and_assumption_errors() {
        let c = Circuit::new(4, vec![zz(4, 0, 1, 0), zz(4, 2, 3, 1)]).unwrap();
        assert!(matches!(ladder_bound(&c, &z(4, 3), 0), Err(Error::Layout(_))));
        assert_eq!(theorem1_bound(&c, &z(4, 3), 0).unwrap().total, 0.0);
        let small = Circuit::new(3, vec![zz(3, 0, 1, 0)]).unwrap();
        assert!(matches!(theorem1_bound(&small, &z(3, 2), 0), Err(Error::Assumption(_))));
    }
}
