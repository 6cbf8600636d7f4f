//! Literal second-moment propagation over all `4^N` doubled Pauli strings.
//!
//! A weight vector `w[σ]` stands for `Σ_σ w[σ] σ⊗σ`. Strings are indexed in
//! base 4 with digit `q` holding the letter on qubit `q` (0=I, 1=X, 2=Y, 3=Z).

use bpscope_core::circuit::{BlockKind, Circuit};
use bpscope_core::pauli::{Letter, PauliString};
use bpscope_core::{Error, Result};

pub const MAX_ORACLE_QUBITS: usize = 3;

fn digit(index: usize, q: usize) -> usize {
    index / 4usize.pow(q as u32) % 4
}

fn letter_digit(l: Letter) -> usize {
    match l {
        Letter::I => 0,
        Letter::X => 1,
        Letter::Y => 2,
        Letter::Z => 3,
    }
}

fn string_index(p: &PauliString) -> usize {
    (0..p.num_qubits()).map(|q| letter_digit(p.letter(q)) * 4usize.pow(q as u32)).sum()
}

/// `E[U†⊗U† (σ⊗σ) U⊗U]` for a Haar-random `U` on `qubits`: identity on the
/// block passes through, everything else spreads evenly over the `4^m - 1`
/// non-identity strings of the block.
fn twirl(w: &[f64], n: usize, qubits: &[usize]) -> Vec<f64> {
    let m = qubits.len();
    let spread = 1.0 / (4f64.powi(m as i32) - 1.0);
    let mut out = vec![0.0; w.len()];
    for (src, &weight) in w.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        if qubits.iter().all(|&q| digit(src, q) == 0) {
            out[src] += weight;
            continue;
        }
        let mut rest = src;
        for &q in qubits {
            rest -= digit(src, q) * 4usize.pow(q as u32);
        }
        for code in 1..4usize.pow(m as u32) {
            let mut dst = rest;
            for (i, &q) in qubits.iter().enumerate() {
                dst += code / 4usize.pow(i as u32) % 4 * 4usize.pow(q as u32);
            }
            out[dst] += weight * spread;
        }
    }
    debug_assert!(n <= MAX_ORACLE_QUBITS);
    out
}

/// `σ ↦ i[Ω, σ]` squared: anticommuting strings map to `4 τ⊗τ` with `τ ∝ Ωσ`,
/// commuting strings vanish.
fn derivative(w: &[f64], n: usize, omega: &[usize]) -> Vec<f64> {
    // letter product table up to phase: I=0, X=1, Y=2, Z=3
    const PRODUCT: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
    let mut out = vec![0.0; w.len()];
    for (src, &weight) in w.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let mut clashes = 0;
        let mut dst = 0;
        for (q, &o) in omega.iter().enumerate().take(n) {
            let s = digit(src, q);
            if s != 0 && o != 0 && s != o {
                clashes += 1;
            }
            dst += PRODUCT[o][s] * 4usize.pow(q as u32);
        }
        if clashes % 2 == 1 {
            out[dst] += 4.0 * weight;
        }
    }
    out
}

/// `Var[∂_μ ⟨h⟩]` over independent Haar blocks, by literal propagation.
pub fn brute_twirl_variance(c: &Circuit, h: &PauliString, param_index: usize) -> Result<f64> {
    let n = c.num_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::SizeLimit(format!("oracle handles at most {MAX_ORACLE_QUBITS} qubits, got {n}")));
    }
    if h.num_qubits() != n {
        return Err(Error::Dimension(format!("term on {} qubits, circuit on {n}", h.num_qubits())));
    }
    if c.blocks().iter().any(|b| b.kind() != BlockKind::Design2) {
        return Err(Error::Assumption("oracle needs 2-design blocks".into()));
    }
    let kd = c.differential_block(param_index)?;
    let omega: Vec<usize> = c.param_gate(param_index)?.generator().letters().into_iter().map(letter_digit).collect();
    let mut w = vec![0.0; 4usize.pow(n as u32)];
    w[string_index(h)] = 1.0;
    for (k, b) in c.blocks().iter().enumerate().rev() {
        let qubits: Vec<usize> = (0..n).filter(|&q| b.support() >> q & 1 == 1).collect();
        w = twirl(&w, n, &qubits);
        if k == kd {
            w = derivative(&w, n, &omega);
            w = twirl(&w, n, &qubits);
        }
    }
    // ⟨0|σ|0⟩² is 1 exactly for strings made of I and Z
    Ok(w.iter()
        .enumerate()
        .filter(|(i, _)| (0..n).all(|q| matches!(digit(*i, q), 0 | 3)))
        .map(|(_, v)| v)
        .sum())
}
