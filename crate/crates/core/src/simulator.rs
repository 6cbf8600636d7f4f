//! Dense statevector simulation, gradients and Monte-Carlo variance estimates.
//!
//! Basis index bit `q` is the computational value of qubit `q`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Block, BlockKind, Circuit, Gate};
use crate::error::{Error, Result};
use crate::models::Hamiltonian;
use crate::pauli::{qubits_of, PauliString};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const SHIFT: f64 = std::f64::consts::FRAC_PI_4;

/// Largest register the dense simulator accepts.
pub const MAX_SIM_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn i_pow(e: u32) -> Complex64 {
    match e % 4 {
        0 => C1,
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `P|b> = coef(b) |b ^ x|`.
#[derive(Clone, Copy)]
struct PauliAction {
    x: usize,
    z: usize,
    base: Complex64,
}

impl PauliAction {
    fn new(p: &PauliString) -> Self {
        PauliAction {
            x: p.x_bits() as usize,
            z: p.z_bits() as usize,
            base: i_pow(p.phase_exponent() as u32 + p.y_count()),
        }
    }

    #[inline]
    fn coef(&self, b: usize) -> Complex64 {
        if (self.z & b).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

impl StateVector {
    /// The all-zero computational basis state.
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_SIM_QUBITS {
            return Err(Error::SizeLimit(format!("{n} qubits exceeds the dense simulator limit")));
        }
        let mut amps = vec![C0; 1 << n];
        amps[0] = C1;
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::Dimension(format!("{} amplitudes for {n} qubits", amps.len())));
        }
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check(&self, p: &PauliString) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::Dimension(format!(
                "operator on {} qubits, state on {}",
                p.num_qubits(),
                self.n
            )));
        }
        Ok(())
    }

    /// `|psi> <- P |psi>` including the phase of `P`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check(p)?;
        let act = PauliAction::new(p);
        let mut out = vec![C0; self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            out[b ^ act.x] = act.coef(b) * a;
        }
        self.amps = out;
        Ok(())
    }

    /// `|psi> <- exp(-i θ P) |psi>` for a Pauli string `P` with phase `+1`.
    pub fn apply_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        self.check(p)?;
        rotate(&mut self.amps, PauliAction::new(p), theta);
        Ok(())
    }

    /// Applies a `2^k x 2^k` unitary on `qubits`; local bit `i` maps to `qubits[i]`.
    pub fn apply_unitary(&mut self, qubits: &[usize], u: &DMatrix<Complex64>) -> Result<()> {
        let k = qubits.len();
        let d = 1usize << k;
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension(format!("{}x{} matrix on {k} qubits", u.nrows(), u.ncols())));
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n) {
            return Err(Error::QubitOutOfRange { qubit: q, qubits: self.n });
        }
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        let offsets: Vec<usize> = (0..d)
            .map(|l| (0..k).filter(|&i| l >> i & 1 == 1).map(|i| 1usize << qubits[i]).sum())
            .collect();
        let mut gathered = vec![C0; d];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                gathered[l] = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = C0;
                for (c, g) in gathered.iter().enumerate() {
                    acc += u[(r, c)] * g;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<Complex64> {
        self.check(p)?;
        let act = PauliAction::new(p);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(b, a)| self.amps[b ^ act.x].conj() * act.coef(b) * a)
            .sum())
    }

    /// `<psi|H|psi>`; fails if the imaginary residue exceeds 1e-10.
    pub fn expectation(&self, h: &Hamiltonian) -> Result<f64> {
        if h.num_qubits() != self.n {
            return Err(Error::Dimension(format!(
                "Hamiltonian on {} qubits, state on {}",
                h.num_qubits(),
                self.n
            )));
        }
        let mut acc = C0;
        for (lambda, p) in h.terms() {
            acc += self.expectation_pauli(p)? * *lambda;
        }
        if acc.im.abs() > 1e-10 * (1.0 + acc.re.abs()) {
            return Err(Error::Invalid(format!("non-real expectation {acc}")));
        }
        Ok(acc.re)
    }

    /// Returns `H |psi>`.
    pub fn apply_hamiltonian(&self, h: &Hamiltonian) -> StateVector {
        let mut out = vec![C0; self.amps.len()];
        apply_hamiltonian_into(h, &self.amps, &mut out);
        StateVector { n: self.n, amps: out }
    }
}

fn rotate(amps: &mut [Complex64], act: PauliAction, theta: f64) {
    let (s, c) = theta.sin_cos();
    let mis = Complex64::new(0.0, -s);
    if act.x == 0 {
        let even = c + mis * act.base;
        let odd = c - mis * act.base;
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= if (act.z & b).count_ones() % 2 == 1 { odd } else { even };
        }
        return;
    }
    let m = mis * act.base;
    let pivot = 1usize << (usize::BITS - 1 - act.x.leading_zeros());
    for hi in (0..amps.len()).step_by(2 * pivot) {
        for b in hi..hi + pivot {
            let b2 = b ^ act.x;
            let (a, a2) = (amps[b], amps[b2]);
            let m1 = if (act.z & b2).count_ones() % 2 == 1 { -m } else { m };
            let m2 = if (act.z & b).count_ones() % 2 == 1 { -m } else { m };
            amps[b] = a * c + m1 * a2;
            amps[b2] = a2 * c + m2 * a;
        }
    }
}

/// [`rotate`] applied to two registers in one sweep.
fn rotate_both(u: &mut [Complex64], v: &mut [Complex64], act: PauliAction, theta: f64) {
    let (s, c) = theta.sin_cos();
    let m = Complex64::new(0.0, -s) * act.base;
    let sign = |b: usize| if (act.z & b).count_ones() % 2 == 1 { -m } else { m };
    if act.x == 0 {
        let (even, odd) = (c + m, c - m);
        for (b, (a, w)) in u.iter_mut().zip(v.iter_mut()).enumerate() {
            let f = if (act.z & b).count_ones() % 2 == 1 { odd } else { even };
            *a *= f;
            *w *= f;
        }
        return;
    }
    let pivot = 1usize << (usize::BITS - 1 - act.x.leading_zeros());
    for hi in (0..u.len()).step_by(2 * pivot) {
        for b in hi..hi + pivot {
            let b2 = b ^ act.x;
            let (m1, m2) = (sign(b2), sign(b));
            let (a, a2) = (u[b], u[b2]);
            u[b] = a * c + m1 * a2;
            u[b2] = a2 * c + m2 * a;
            let (w, w2) = (v[b], v[b2]);
            v[b] = w * c + m1 * w2;
            v[b2] = w2 * c + m2 * w;
        }
    }
}

/// `<lam| P |phi>` without materializing `P |phi>`.
fn sandwich(lam: &[Complex64], act: PauliAction, phi: &[Complex64]) -> Complex64 {
    let signed: Complex64 = phi
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let t = lam[b ^ act.x].conj() * a;
            if (act.z & b).count_ones() % 2 == 1 {
                -t
            } else {
                t
            }
        })
        .sum();
    signed * act.base
}

pub(crate) fn apply_hamiltonian_into(h: &Hamiltonian, input: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|o| *o = C0);
    for (lambda, p) in h.terms() {
        let act = PauliAction::new(p);
        for (b, a) in input.iter().enumerate() {
            out[b ^ act.x] += act.coef(b) * a * *lambda;
        }
    }
}

fn check_theta(c: &Circuit, theta: &[f64]) -> Result<()> {
    if theta.len() != c.num_params() {
        return Err(Error::Dimension(format!(
            "{} parameters supplied, circuit has {}",
            theta.len(),
            c.num_params()
        )));
    }
    Ok(())
}

fn flat_gates(c: &Circuit) -> Vec<&Gate> {
    c.blocks().iter().flat_map(|b| b.gates()).collect()
}

/// Runs the parametrized circuit on `|0...0>`.
pub fn run(c: &Circuit, theta: &[f64]) -> Result<StateVector> {
    check_theta(c, theta)?;
    let mut psi = StateVector::zero(c.num_qubits())?;
    for g in flat_gates(c) {
        psi.apply_rotation(g.generator(), g.resolve(theta))?;
    }
    Ok(psi)
}

/// Runs the circuit with every design2 block replaced by a fresh Haar unitary.
/// Structured blocks run their gates with the supplied parameters.
pub fn run_haar<R: Rng + ?Sized>(c: &Circuit, theta: &[f64], rng: &mut R) -> Result<StateVector> {
    check_theta(c, theta)?;
    let mut psi = StateVector::zero(c.num_qubits())?;
    for b in c.blocks() {
        apply_block_haar_or_gates(&mut psi, b, theta, rng)?;
    }
    Ok(psi)
}

fn apply_block_haar_or_gates<R: Rng + ?Sized>(
    psi: &mut StateVector,
    b: &Block,
    theta: &[f64],
    rng: &mut R,
) -> Result<()> {
    match b.kind() {
        BlockKind::Design2 => {
            let q = qubits_of(b.support());
            let u = haar_unitary(1 << q.len(), rng);
            psi.apply_unitary(&q, &u)
        }
        BlockKind::Structured => {
            for g in b.gates() {
                psi.apply_rotation(g.generator(), g.resolve(theta))?;
            }
            Ok(())
        }
    }
}

/// Haar-random `d x d` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C1 };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn energy(c: &Circuit, theta: &[f64], h: &Hamiltonian) -> Result<f64> {
    run(c, theta)?.expectation(h)
}

fn check_h(c: &Circuit, h: &Hamiltonian) -> Result<()> {
    if h.num_qubits() != c.num_qubits() {
        return Err(Error::Dimension(format!(
            "Hamiltonian on {} qubits, circuit on {}",
            h.num_qubits(),
            c.num_qubits()
        )));
    }
    Ok(())
}

/// Parameter-shift gradient: `C(θ + π/4 e_μ) - C(θ - π/4 e_μ)` per component.
pub fn gradient(c: &Circuit, theta: &[f64], h: &Hamiltonian) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    check_h(c, h)?;
    let mut shifted = theta.to_vec();
    (0..theta.len())
        .map(|mu| {
            shifted[mu] = theta[mu] + SHIFT;
            let plus = energy(c, &shifted, h)?;
            shifted[mu] = theta[mu] - SHIFT;
            let minus = energy(c, &shifted, h)?;
            shifted[mu] = theta[mu];
            Ok(plus - minus)
        })
        .collect()
}

/// Parameter-shift derivative for a single parameter, sharing the prefix
/// before the differentiated gate.
pub fn shift_derivative(c: &Circuit, theta: &[f64], h: &Hamiltonian, mu: usize) -> Result<f64> {
    check_theta(c, theta)?;
    check_h(c, h)?;
    let gates = flat_gates(c);
    let pos = gates
        .iter()
        .position(|g| g.parameter_index() == Some(mu))
        .ok_or(Error::ParamOutOfRange { index: mu, params: c.num_params() })?;
    let mut psi = StateVector::zero(c.num_qubits())?;
    for g in &gates[..pos] {
        psi.apply_rotation(g.generator(), g.resolve(theta))?;
    }
    let branch = |delta: f64| -> Result<f64> {
        let mut s = psi.clone();
        s.apply_rotation(gates[pos].generator(), theta[mu] + delta)?;
        for g in &gates[pos + 1..] {
            s.apply_rotation(g.generator(), g.resolve(theta))?;
        }
        s.expectation(h)
    };
    Ok(branch(SHIFT)? - branch(-SHIFT)?)
}

/// Blocks up to this many qubits are contracted as dense local unitaries in
/// the adjoint sweep; larger ones are swept gate by gate.
const LOCAL_BLOCK_MAX: usize = 3;

/// Row-major `d x d` matrix on a block's qubits.
type Local = Vec<Complex64>;

fn local_identity(d: usize) -> Local {
    (0..d * d).map(|i| if i % (d + 1) == 0 { C1 } else { C0 }).collect()
}

fn local_mul(a: &Local, b: &Local, d: usize) -> Local {
    let mut out = vec![C0; d * d];
    for r in 0..d {
        for k in 0..d {
            let x = a[r * d + k];
            for c in 0..d {
                out[r * d + c] += x * b[k * d + c];
            }
        }
    }
    out
}

fn local_adjoint(a: &Local, d: usize) -> Local {
    (0..d * d).map(|i| a[(i % d) * d + i / d].conj()).collect()
}

/// Index offsets of a block's local basis states and the mask of its qubits.
struct Window {
    offsets: Vec<usize>,
    mask: usize,
}

impl Window {
    fn new(qubits: &[usize]) -> Self {
        let offsets = (0..1usize << qubits.len())
            .map(|l| qubits.iter().enumerate().filter(|(i, _)| l >> i & 1 == 1).map(|(_, &q)| 1usize << q).sum())
            .collect();
        Window { offsets, mask: qubits.iter().map(|&q| 1usize << q).sum() }
    }

    fn bases(&self, len: usize) -> impl Iterator<Item = usize> + '_ {
        (0..len).filter(move |b| b & self.mask == 0)
    }
}

fn apply_local(amps: &mut [Complex64], w: &Window, u: &Local) {
    let d = w.offsets.len();
    let mut g = [C0; 1 << LOCAL_BLOCK_MAX];
    for base in w.bases(amps.len()) {
        for (l, off) in w.offsets.iter().enumerate() {
            g[l] = amps[base + off];
        }
        for (r, off) in w.offsets.iter().enumerate() {
            amps[base + off] = (0..d).map(|c| u[r * d + c] * g[c]).sum();
        }
    }
}

/// Applies `u` to both registers and returns `R[a][b] = Σ phi[a] conj(lam[b])`
/// over the complementary qubits, taken before the update.
fn sweep_local(phi: &mut [Complex64], lam: &mut [Complex64], w: &Window, u: &Local) -> Local {
    let d = w.offsets.len();
    let mut r = vec![C0; d * d];
    let mut gp = [C0; 1 << LOCAL_BLOCK_MAX];
    let mut gl = [C0; 1 << LOCAL_BLOCK_MAX];
    for base in w.bases(phi.len()) {
        for (l, off) in w.offsets.iter().enumerate() {
            gp[l] = phi[base + off];
            gl[l] = lam[base + off].conj();
        }
        for a in 0..d {
            for b in 0..d {
                r[a * d + b] += gp[a] * gl[b];
            }
        }
        for (row, off) in w.offsets.iter().enumerate() {
            let (mut p, mut q) = (C0, C0);
            for c in 0..d {
                p += u[row * d + c] * gp[c];
                q += u[row * d + c] * gl[c].conj();
            }
            phi[base + off] = p;
            lam[base + off] = q;
        }
    }
    r
}

/// Local generators and the running products of a small block.
struct LocalBlock {
    window: Window,
    d: usize,
    generators: Vec<Local>,
    /// `suffix[j]`: product of the gates after gate `j`, last gate leftmost.
    suffix: Vec<Local>,
    unitary: Local,
}

impl LocalBlock {
    fn new(b: &Block, theta: &[f64]) -> Result<Self> {
        let qubits = qubits_of(b.support());
        let d = 1usize << qubits.len();
        let mut generators = Vec::with_capacity(b.gates().len());
        let mut gates = Vec::with_capacity(b.gates().len());
        for g in b.gates() {
            let p = pauli_matrix(&g.generator().restrict(&qubits)?);
            let p: Local = (0..d * d).map(|i| p[(i / d, i % d)]).collect();
            let (s, c) = g.resolve(theta).sin_cos();
            let ident = local_identity(d);
            gates.push(ident.iter().zip(&p).map(|(e, x)| e * c - Complex64::new(0.0, s) * x).collect::<Local>());
            generators.push(p);
        }
        let mut suffix = vec![local_identity(d); gates.len()];
        for j in (0..gates.len().saturating_sub(1)).rev() {
            suffix[j] = local_mul(&suffix[j + 1], &gates[j + 1], d);
        }
        let unitary = match gates.first() {
            Some(g0) => local_mul(&suffix[0], g0, d),
            None => local_identity(d),
        };
        Ok(LocalBlock { window: Window::new(&qubits), d, generators, suffix, unitary })
    }
}

/// Energy and full gradient by reverse-mode (adjoint) evaluation.
pub fn adjoint_gradient(c: &Circuit, theta: &[f64], h: &Hamiltonian) -> Result<(f64, Vec<f64>)> {
    check_theta(c, theta)?;
    check_h(c, h)?;
    let locals: Vec<Option<LocalBlock>> = c
        .blocks()
        .iter()
        .map(|b| if b.size() <= LOCAL_BLOCK_MAX { LocalBlock::new(b, theta).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;
    let mut phi = StateVector::zero(c.num_qubits())?;
    for (b, local) in c.blocks().iter().zip(&locals) {
        match local {
            Some(l) => apply_local(&mut phi.amps, &l.window, &l.unitary),
            None => {
                for g in b.gates() {
                    rotate(&mut phi.amps, PauliAction::new(g.generator()), g.resolve(theta));
                }
            }
        }
    }
    let mut lam = phi.apply_hamiltonian(h);
    let e = phi.inner(&lam).re;
    let mut grad = vec![0.0; theta.len()];
    for (b, local) in c.blocks().iter().zip(&locals).rev() {
        match local {
            Some(l) => {
                let d = l.d;
                let r = sweep_local(&mut phi.amps, &mut lam.amps, &l.window, &local_adjoint(&l.unitary, d));
                for (j, g) in b.gates().iter().enumerate() {
                    if let Some(mu) = g.parameter_index() {
                        // <lam_out| S P S^† |phi_out> with S the gates after j
                        let s = &l.suffix[j];
                        let x = local_mul(&local_mul(s, &l.generators[j], d), &local_adjoint(s, d), d);
                        let value: Complex64 = (0..d * d).map(|i| x[(i % d) * d + i / d] * r[i]).sum();
                        grad[mu] = 2.0 * value.im;
                    }
                }
            }
            None => {
                for g in b.gates().iter().rev() {
                    let act = PauliAction::new(g.generator());
                    if let Some(mu) = g.parameter_index() {
                        grad[mu] = 2.0 * sandwich(&lam.amps, act, &phi.amps).im;
                    }
                    rotate_both(&mut phi.amps, &mut lam.amps, act, -g.resolve(theta));
                }
            }
        }
    }
    Ok((e, grad))
}

/// Central finite-difference gradient with step `step`.
pub fn finite_difference_gradient(c: &Circuit, theta: &[f64], h: &Hamiltonian, step: f64) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|mu| {
            t[mu] = theta[mu] + step;
            let plus = energy(c, &t, h)?;
            t[mu] = theta[mu] - step;
            let minus = energy(c, &t, h)?;
            t[mu] = theta[mu];
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMode {
    /// Every parameter uniform in `[0, 2π)`; derivative by parameter shift.
    CartanUniform,
    /// Haar blocks, with the differential block split as `R · exp(-iθΩ) · L`.
    HaarSandwich,
}

impl McMode {
    pub fn as_str(self) -> &'static str {
        match self {
            McMode::CartanUniform => "cartan-uniform",
            McMode::HaarSandwich => "haar-sandwich",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub samples: usize,
    pub mean: f64,
    pub mean_std_error: f64,
    pub variance: f64,
    /// Jackknife standard error of `variance`.
    pub std_error: f64,
}

/// Sample mean, unbiased variance and delete-one jackknife error of the variance.
pub fn sample_stats(xs: &[f64]) -> McStats {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let d: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let s1: f64 = d.iter().sum();
    let s2: f64 = d.iter().map(|x| x * x).sum();
    let variance = (s2 - s1 * s1 / nf) / (nf - 1.0);
    if n < 3 {
        return McStats { samples: n, mean, mean_std_error: (variance / nf).sqrt(), variance, std_error: f64::NAN };
    }
    let loo: Vec<f64> = d
        .iter()
        .map(|x| {
            let a = s1 - x;
            let b = s2 - x * x;
            (b - a * a / (nf - 1.0)) / (nf - 2.0)
        })
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let jk = ((nf - 1.0) / nf * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();
    McStats { samples: n, mean, mean_std_error: (variance / nf).sqrt(), variance, std_error: jk }
}

const MC_CHUNK: usize = 512;

/// Monte-Carlo estimate of `Var[∂_μ C]`; chunked RNG streams make the result
/// independent of the thread count.
pub fn mc_variance(
    c: &Circuit,
    h: &Hamiltonian,
    mu: usize,
    samples: usize,
    mode: McMode,
    seed: u64,
) -> Result<McStats> {
    if samples < 2 {
        return Err(Error::Invalid("at least 2 samples required".into()));
    }
    check_h(c, h)?;
    let (kd, gd) = c.param_site(mu)?;
    if mode == McMode::HaarSandwich && c.block(kd)?.kind() != BlockKind::Design2 {
        return Err(Error::Assumption(format!("differential block {kd} is not design2")));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let values: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let count = MC_CHUNK.min(samples - ci * MC_CHUNK);
            (0..count)
                .map(|_| match mode {
                    McMode::CartanUniform => {
                        let theta: Vec<f64> =
                            (0..c.num_params()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                        shift_derivative(c, &theta, h, mu)
                    }
                    McMode::HaarSandwich => haar_sandwich_sample(c, h, kd, gd, &mut rng),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = values.into_iter().flatten().collect();
    Ok(sample_stats(&xs))
}

fn haar_sandwich_sample<R: Rng + ?Sized>(
    c: &Circuit,
    h: &Hamiltonian,
    kd: usize,
    gd: usize,
    rng: &mut R,
) -> Result<f64> {
    let theta: Vec<f64> = (0..c.num_params()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    let mut psi = StateVector::zero(c.num_qubits())?;
    for b in &c.blocks()[..kd] {
        apply_block_haar_or_gates(&mut psi, b, &theta, rng)?;
    }
    let block = &c.blocks()[kd];
    let q = qubits_of(block.support());
    let d = 1 << q.len();
    psi.apply_unitary(&q, &haar_unitary(d, rng))?;
    let right = haar_unitary(d, rng);
    let later: Vec<Later> = c.blocks()[kd + 1..]
        .iter()
        .map(|b| match b.kind() {
            BlockKind::Design2 => {
                let bq = qubits_of(b.support());
                Later::Unitary(haar_unitary(1 << bq.len(), rng), bq)
            }
            BlockKind::Structured => Later::Gates(b.clone()),
        })
        .collect();
    let omega = block.gates()[gd].generator();
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let branch = |delta: f64| -> Result<f64> {
        let mut s = psi.clone();
        s.apply_rotation(omega, angle + delta)?;
        s.apply_unitary(&q, &right)?;
        for l in &later {
            match l {
                Later::Unitary(u, bq) => s.apply_unitary(bq, u)?,
                Later::Gates(b) => {
                    for g in b.gates() {
                        s.apply_rotation(g.generator(), g.resolve(&theta))?;
                    }
                }
            }
        }
        s.expectation(h)
    };
    Ok(branch(SHIFT)? - branch(-SHIFT)?)
}

enum Later {
    Unitary(DMatrix<Complex64>, Vec<usize>),
    Gates(Block),
}

/// Dense matrix of a Pauli string (test and oracle use; `2^n x 2^n`).
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let d = 1usize << p.num_qubits();
    let act = PauliAction::new(p);
    let mut m = DMatrix::from_element(d, d, C0);
    for b in 0..d {
        m[(b ^ act.x, b)] = act.coef(b);
    }
    m
}
