//! Dense `2^N × 2^N` matrices built entry by entry from single-qubit factors.

use bpscope_core::circuit::Circuit;
use bpscope_core::models::Hamiltonian;
use bpscope_core::pauli::{Letter, PauliString};
use bpscope_core::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub const MAX_DENSE_QUBITS: usize = 8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_matrix(l: Letter) -> [[Complex64; 2]; 2] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match l {
        Letter::I => [[o, z], [z, o]],
        Letter::X => [[z, o], [o, z]],
        Letter::Y => [[z, -i], [i, z]],
        Letter::Z => [[o, z], [z, -o]],
    }
}

/// Matrix of `p` including its phase; bit `q` of a basis index is qubit `q`.
pub fn dense_pauli(p: &PauliString) -> DMatrix<Complex64> {
    let n = p.num_qubits();
    let factors: Vec<_> = p.letters().into_iter().map(letter_matrix).collect();
    let phase = c(0.0, 1.0).powu(p.phase_exponent() as u32);
    DMatrix::from_fn(1 << n, 1 << n, |r, col| {
        (0..n).fold(phase, |acc, q| acc * factors[q][r >> q & 1][col >> q & 1])
    })
}

fn check(c: &Circuit) -> Result<()> {
    if c.num_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit(format!("dense oracle handles at most {MAX_DENSE_QUBITS} qubits")));
    }
    Ok(())
}

/// Product of `cos θ·1 - i sin θ·P` over all gates in application order.
pub fn dense_unitary(circuit: &Circuit, theta: &[f64]) -> Result<DMatrix<Complex64>> {
    check(circuit)?;
    if theta.len() != circuit.num_params() {
        return Err(Error::Dimension(format!("{} angles for {} parameters", theta.len(), circuit.num_params())));
    }
    let d = 1 << circuit.num_qubits();
    let mut u = DMatrix::<Complex64>::identity(d, d);
    for b in circuit.blocks() {
        for g in b.gates() {
            let a = g.resolve(theta);
            let gate = DMatrix::<Complex64>::identity(d, d) * c(a.cos(), 0.0) - dense_pauli(g.generator()) * c(0.0, a.sin());
            u = gate * u;
        }
    }
    Ok(u)
}

pub fn dense_state(circuit: &Circuit, theta: &[f64]) -> Result<DVector<Complex64>> {
    Ok(dense_unitary(circuit, theta)?.column(0).into_owned())
}

pub fn dense_hamiltonian(h: &Hamiltonian) -> DMatrix<Complex64> {
    let d = 1 << h.num_qubits();
    h.terms()
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, (lambda, p)| acc + dense_pauli(p) * c(*lambda, 0.0))
}

pub fn dense_energy(circuit: &Circuit, theta: &[f64], h: &Hamiltonian) -> Result<f64> {
    let psi = dense_state(circuit, theta)?;
    Ok((psi.adjoint() * dense_hamiltonian(h) * &psi)[(0, 0)].re)
}

/// Central differences of [`dense_energy`] with step `step`.
pub fn dense_gradient_fd(circuit: &Circuit, theta: &[f64], h: &Hamiltonian, step: f64) -> Result<Vec<f64>> {
    (0..theta.len())
        .map(|mu| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[mu] += step;
            minus[mu] -= step;
            Ok((dense_energy(circuit, &plus, h)? - dense_energy(circuit, &minus, h)?) / (2.0 * step))
        })
        .collect()
}
