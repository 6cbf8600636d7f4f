//! Exact gradient variance under the local 2-design assumption.
//!
//! The doubled operator `σ⊗σ` is tracked only through its support pattern:
//! after a block twirl every string on the smeared qubits is equally likely,
//! so a class "uniform over strings with support exactly `T`" is closed under
//! further twirls. A class holds `3^|T|` strings, `1` in `3^|T|` of which is
//! `Z/I`-only and contributes `<0|σ|0>^2 = 1` to the readout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::models::Hamiltonian;
use crate::pauli::{qubits_of, PauliString, QubitMask};

/// Default threshold below which pattern weights are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportDistribution {
    weights: BTreeMap<QubitMask, f64>,
    pruned_mass: f64,
}

impl SupportDistribution {
    pub fn single(pattern: QubitMask) -> Self {
        let mut weights = BTreeMap::new();
        if pattern != 0 {
            weights.insert(pattern, 1.0);
        }
        SupportDistribution { weights, pruned_mass: 0.0 }
    }

    pub fn weights(&self) -> &BTreeMap<QubitMask, f64> {
        &self.weights
    }

    pub fn weight(&self, pattern: QubitMask) -> f64 {
        self.weights.get(&pattern).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Accumulated weight removed by pruning.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    /// `Σ_T w(T) 3^{-|T|}`.
    pub fn readout(&self) -> f64 {
        self.weights.iter().map(|(t, w)| w * 3f64.powi(-(t.count_ones() as i32))).sum()
    }

    fn prune(&mut self, threshold: f64) {
        let mut dropped = 0.0;
        self.weights.retain(|_, w| {
            if *w < threshold {
                dropped += *w;
                false
            } else {
                true
            }
        });
        self.pruned_mass += dropped;
    }
}

/// Nonempty sub-patterns of `s` with their smearing fractions `3^|T'| / (4^|s| - 1)`.
fn smear_table(s: QubitMask) -> Vec<(QubitMask, f64)> {
    let q = qubits_of(s);
    let denom = 4f64.powi(q.len() as i32) - 1.0;
    (1usize..1 << q.len())
        .map(|bits| {
            let t: QubitMask = q.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &b)| 1u64 << b).sum();
            (t, 3f64.powi(bits.count_ones() as i32) / denom)
        })
        .collect()
}

fn smear(d: &SupportDistribution, s: QubitMask, keep_disjoint: bool, scale: f64) -> SupportDistribution {
    let table = smear_table(s);
    let mut out = BTreeMap::new();
    for (&t, &w) in &d.weights {
        if t & s == 0 {
            if keep_disjoint {
                *out.entry(t).or_insert(0.0) += w;
            }
            continue;
        }
        let rest = t & !s;
        for &(sub, f) in &table {
            *out.entry(rest | sub).or_insert(0.0) += w * f * scale;
        }
    }
    SupportDistribution { weights: out, pruned_mass: d.pruned_mass }
}

/// Block twirl on support `s`.
pub fn twirl_step(d: &SupportDistribution, s: QubitMask) -> Result<SupportDistribution> {
    if s == 0 {
        return Err(Error::Invalid("twirl on an empty support".into()));
    }
    Ok(smear(d, s, true, 1.0))
}

/// Twirl, derivative-squared, twirl on the differential block: patterns
/// disjoint from `s` vanish, the rest are smeared and scaled by `2·4^|s| / (4^|s| - 1)`.
pub fn differential_step(d: &SupportDistribution, s: QubitMask) -> Result<SupportDistribution> {
    if s == 0 {
        return Err(Error::Invalid("differential step on an empty support".into()));
    }
    let four = 4f64.powi(s.count_ones() as i32);
    Ok(smear(d, s, false, 2.0 * four / (four - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermVariance {
    pub variance: f64,
    pub pruned_mass: f64,
    /// Set when the term is the identity and the derivative vanishes identically.
    pub identity_term: bool,
}

fn check_assumptions(c: &Circuit, support: QubitMask) -> Result<()> {
    if let Some(k) = c.blocks().iter().position(|b| b.kind() != crate::circuit::BlockKind::Design2) {
        return Err(Error::Assumption(format!("block {k} is not a local 2-design")));
    }
    if support & !c.support() != 0 {
        return Err(Error::Assumption(format!(
            "observable qubits {:?} lie outside the circuit support",
            qubits_of(support & !c.support())
        )));
    }
    Ok(())
}

/// Backward sweep from `{s(h): 1}` with the differential step at the block of `mu`.
pub fn exact_term_variance_pruned(c: &Circuit, h: &PauliString, mu: usize, prune: f64) -> Result<TermVariance> {
    if h.num_qubits() != c.num_qubits() {
        return Err(Error::Dimension(format!("term on {} qubits, circuit on {}", h.num_qubits(), c.num_qubits())));
    }
    let kd = c.differential_block(mu)?;
    check_assumptions(c, h.support())?;
    if h.is_identity() {
        return Ok(TermVariance { variance: 0.0, pruned_mass: 0.0, identity_term: true });
    }
    let mut d = SupportDistribution::single(h.support());
    for (k, b) in c.blocks().iter().enumerate().rev() {
        d = if k == kd { differential_step(&d, b.support())? } else { twirl_step(&d, b.support())? };
        d.prune(prune);
        if d.is_empty() {
            break;
        }
    }
    Ok(TermVariance { variance: d.readout(), pruned_mass: d.pruned_mass, identity_term: false })
}

pub fn exact_term_variance(c: &Circuit, h: &PauliString, mu: usize) -> Result<TermVariance> {
    exact_term_variance_pruned(c, h, mu, DEFAULT_PRUNE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub param_index: usize,
    pub total: f64,
    /// `λ_j^2 · Var[∂ <h_j>]` per term, in Hamiltonian order.
    pub per_term: Vec<TermVariance>,
}

/// `Σ_j λ_j^2 Var[∂ <h_j>]`; cross terms vanish under coverage.
pub fn exact_variance(c: &Circuit, h: &Hamiltonian, mu: usize) -> Result<VarianceReport> {
    exact_variance_pruned(c, h, mu, DEFAULT_PRUNE)
}

pub fn exact_variance_pruned(c: &Circuit, h: &Hamiltonian, mu: usize, prune: f64) -> Result<VarianceReport> {
    check_assumptions(c, h.support())?;
    let per_term = h
        .terms()
        .iter()
        .map(|(lambda, p)| {
            let t = exact_term_variance_pruned(c, p, mu, prune)?;
            Ok(TermVariance { variance: lambda * lambda * t.variance, ..t })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceReport { param_index: mu, total: per_term.iter().map(|t| t.variance).sum(), per_term })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::mask_of;

    #[test]
    fn single_qubit_twirl_is_identity_on_patterns() {
        let d = twirl_step(&SupportDistribution::single(0b1), 0b1).unwrap();
        assert_eq!(d.weight(0b1), 1.0);
    }

    #[test]
    fn two_qubit_smear_fractions() {
        let d = twirl_step(&SupportDistribution::single(mask_of(&[0])), mask_of(&[0, 1])).unwrap();
        assert!((d.weight(0b01) - 3.0 / 15.0).abs() < 1e-15);
        assert!((d.weight(0b10) - 3.0 / 15.0).abs() < 1e-15);
        assert!((d.weight(0b11) - 9.0 / 15.0).abs() < 1e-15);
        let untouched = twirl_step(&SupportDistribution::single(0b100), 0b011).unwrap();
        assert_eq!(untouched.weight(0b100), 1.0);
    }

    #[test]
    fn differential_kills_disjoint_and_scales() {
        let d = differential_step(&SupportDistribution::single(0b100), 0b011).unwrap();
        assert!(d.is_empty());
        let d = differential_step(&SupportDistribution::single(0b001), 0b011).unwrap();
        assert!((d.total() - 32.0 / 15.0).abs() < 1e-14);
        assert!((d.readout() - 32.0 / 75.0).abs() < 1e-15);
    }

    #[test]
    fn empty_support_rejected() {
        assert!(twirl_step(&SupportDistribution::single(1), 0).is_err());
        assert!(differential_step(&SupportDistribution::single(1), 0).is_err());
    }
}
