//! Random small instances for oracle comparisons.

use bpscope_core::circuit::{Block, BlockKind, Circuit, Gate};
use bpscope_core::pauli::{Letter, PauliString};
use rand::seq::SliceRandom;
use rand::Rng;

const LETTERS: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

fn random_string<R: Rng + ?Sized>(n: usize, qubits: &[usize], full: bool, rng: &mut R) -> PauliString {
    loop {
        let letters: Vec<Letter> = qubits
            .iter()
            .map(|_| {
                if full || rng.random_bool(0.6) {
                    LETTERS[rng.random_range(0..3)]
                } else {
                    Letter::I
                }
            })
            .collect();
        let p = PauliString::on_qubits(n, &letters, qubits).expect("valid qubits");
        if !p.is_identity() {
            return p;
        }
    }
}

/// Non-identity Pauli string on `n` qubits.
pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    let all: Vec<usize> = (0..n).collect();
    random_string(n, &all, false, rng)
}

/// `blocks` 2-design blocks of size 1..=`max_size`, each with 1 to 3
/// parametrized gates. The first gate spans the whole block support.
pub fn random_design2_circuit<R: Rng + ?Sized>(n: usize, blocks: usize, max_size: usize, rng: &mut R) -> Circuit {
    let mut next = 0;
    let mut out = Vec::new();
    let mut qubits: Vec<usize> = (0..n).collect();
    for _ in 0..blocks {
        let size = rng.random_range(1..=max_size.min(n));
        qubits.shuffle(rng);
        let mut support = qubits[..size].to_vec();
        support.sort_unstable();
        let count = rng.random_range(1..=3);
        let gates = (0..count)
            .map(|g| {
                let p = random_string(n, &support, g == 0, rng);
                next += 1;
                Gate::param(p, next - 1).expect("hermitian generator")
            })
            .collect();
        out.push(Block::new(gates, BlockKind::Design2).expect("nonempty block"));
    }
    Circuit::new(n, out).expect("dense parameters")
}

/// Angles uniform in `[0, 2π)`.
pub fn random_angles<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}
