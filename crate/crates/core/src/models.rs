//! Hamiltonians, the open-boundary toric code, exact diagonalization and
//! entanglement diagnostics.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{full_mask, qubits_of, Letter, PauliString, QubitMask};
use crate::simulator::{apply_hamiltonian_into, run, StateVector};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Weighted sum of Pauli strings with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<(f64, PauliString)>,
    range: usize,
}

impl Hamiltonian {
    /// Merges repeated strings; a `-1` phase is folded into the coefficient.
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        for (lambda, p) in terms {
            if p.num_qubits() != n {
                return Err(Error::Dimension(format!("term {p} is not on {n} qubits")));
            }
            let sign = match p.phase_exponent() {
                0 => 1.0,
                2 => -1.0,
                _ => return Err(Error::Invalid(format!("term {p} is not Hermitian"))),
            };
            let p = p.with_phase(0);
            match index.get(&(p.x_bits(), p.z_bits())) {
                Some(&i) => merged[i].0 += sign * lambda,
                None => {
                    index.insert((p.x_bits(), p.z_bits()), merged.len());
                    merged.push((sign * lambda, p));
                }
            }
        }
        let range = merged.iter().map(|(_, p)| p.weight()).max().unwrap_or(0);
        Ok(Hamiltonian { n, terms: merged, range })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Maximum term weight `r`.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn support(&self) -> QubitMask {
        self.terms.iter().fold(0, |m, (_, p)| m | p.support())
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Hamiltonian {
        Hamiltonian {
            n: self.n,
            terms: self.terms.iter().map(|(l, p)| (l * c, *p)).collect(),
            range: self.range,
        }
    }

    /// Canonical text form, stable across runs; used as a cache key.
    pub fn canonical_text(&self) -> String {
        let mut rows: Vec<String> =
            self.terms.iter().map(|(l, p)| format!("{p} {:e}", l)).collect();
        rows.sort();
        format!("n={}\n{}", self.n, rows.join("\n"))
    }

    pub fn to_spec(&self) -> HamiltonianSpec {
        HamiltonianSpec {
            qubits: self.n,
            terms: self.terms.iter().map(|(l, p)| TermSpec { coefficient: *l, pauli: p.to_string() }).collect(),
        }
    }

    /// Dense matrix; intended for small registers.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = 1usize << self.n;
        let mut m = DMatrix::from_element(d, d, C0);
        let mut col = vec![C0; d];
        let mut out = vec![C0; d];
        for b in 0..d {
            col.iter_mut().for_each(|c| *c = C0);
            col[b] = Complex64::new(1.0, 0.0);
            apply_hamiltonian_into(self, &col, &mut out);
            for (r, v) in out.iter().enumerate() {
                m[(r, b)] = *v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub qubits: usize,
    pub terms: Vec<TermSpec>,
}

/// `pauli` accepts the dense or the `"ZZ@[3,4]"` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: f64,
    pub pauli: String,
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<Hamiltonian> {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(j, t)| {
                PauliString::parse(&t.pauli, Some(self.qubits))
                    .map(|p| (t.coefficient, p))
                    .map_err(|e| Error::Invalid(format!("terms[{j}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(self.qubits, terms)
    }
}

/// Open-boundary square lattice of `rows x cols` vertices with one qubit per edge.
///
/// Edges are numbered row by row: the horizontal edges of vertex row `r`
/// come first, followed by the vertical edges hanging below that row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricLattice {
    pub rows: usize,
    pub cols: usize,
}

/// Edges of one plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub top: usize,
    pub left: usize,
    pub right: usize,
    pub bottom: usize,
}

impl Plaquette {
    pub fn edges(&self) -> [usize; 4] {
        [self.top, self.left, self.right, self.bottom]
    }
}

impl ToricLattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Invalid(format!("lattice {rows}x{cols} needs at least 2x2 vertices")));
        }
        let l = ToricLattice { rows, cols };
        if l.num_qubits() > 64 {
            return Err(Error::SizeLimit(format!("{} edges exceed 64 qubits", l.num_qubits())));
        }
        Ok(l)
    }

    fn stride(&self) -> usize {
        2 * self.cols - 1
    }

    pub fn num_qubits(&self) -> usize {
        self.rows * (self.cols - 1) + (self.rows - 1) * self.cols
    }

    /// Edge between vertices `(r, c)` and `(r, c + 1)`.
    pub fn horizontal(&self, r: usize, c: usize) -> usize {
        r * self.stride() + c
    }

    /// Edge between vertices `(r, c)` and `(r + 1, c)`.
    pub fn vertical(&self, r: usize, c: usize) -> usize {
        r * self.stride() + self.cols - 1 + c
    }

    pub fn vertex_edges(&self, r: usize, c: usize) -> Vec<usize> {
        let mut e = Vec::with_capacity(4);
        if r > 0 {
            e.push(self.vertical(r - 1, c));
        }
        if c > 0 {
            e.push(self.horizontal(r, c - 1));
        }
        if c + 1 < self.cols {
            e.push(self.horizontal(r, c));
        }
        if r + 1 < self.rows {
            e.push(self.vertical(r, c));
        }
        e.sort_unstable();
        e
    }

    pub fn plaquette(&self, r: usize, c: usize) -> Plaquette {
        Plaquette {
            top: self.horizontal(r, c),
            left: self.vertical(r, c),
            right: self.vertical(r, c + 1),
            bottom: self.horizontal(r + 1, c),
        }
    }

    /// Plaquettes left to right, then top to bottom.
    pub fn plaquettes(&self) -> Vec<Plaquette> {
        (0..self.rows - 1)
            .flat_map(|r| (0..self.cols - 1).map(move |c| (r, c)))
            .map(|(r, c)| self.plaquette(r, c))
            .collect()
    }

    /// Star operators `A_v` (vertices in row-major order).
    pub fn vertex_operators(&self) -> Vec<PauliString> {
        let n = self.num_qubits();
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| {
                let e = self.vertex_edges(r, c);
                PauliString::on_qubits(n, &vec![Letter::Z; e.len()], &e).expect("valid lattice edges")
            })
            .collect()
    }

    /// Plaquette operators `B_p`.
    pub fn plaquette_operators(&self) -> Vec<PauliString> {
        let n = self.num_qubits();
        self.plaquettes()
            .iter()
            .map(|p| PauliString::on_qubits(n, &[Letter::X; 4], &p.edges()).expect("valid lattice edges"))
            .collect()
    }
}

/// Field triple and the scalar used in the `(1 - h)` stabilizer prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl Field {
    pub fn new(hx: f64, hy: f64, hz: f64) -> Self {
        Field { hx, hy, hz }
    }

    /// Max-norm of the triple.
    pub fn scalar(&self) -> f64 {
        self.hx.abs().max(self.hy.abs()).max(self.hz.abs())
    }
}

/// `(1 - h)(-Σ A_v - Σ B_p) - Σ_j (hx X_j + hy Y_j + hz Z_j)`, with `h` the
/// max-norm of the field unless `prefactor_scalar` overrides it.
pub fn toric_code(lattice: &ToricLattice, field: Field, prefactor_scalar: Option<f64>) -> Result<Hamiltonian> {
    let n = lattice.num_qubits();
    let h = prefactor_scalar.unwrap_or_else(|| field.scalar());
    let mut terms = Vec::new();
    for p in lattice.vertex_operators().into_iter().chain(lattice.plaquette_operators()) {
        terms.push((-(1.0 - h), p));
    }
    for (coef, letter) in [(field.hx, Letter::X), (field.hy, Letter::Y), (field.hz, Letter::Z)] {
        if coef != 0.0 {
            for q in 0..n {
                terms.push((-coef, PauliString::single(n, q, letter)?));
            }
        }
    }
    Hamiltonian::new(n, terms)
}

/// Registers up to this size are diagonalized densely; larger ones use Lanczos.
pub const DENSE_ED_MAX_QUBITS: usize = 10;
/// Hard limit for exact diagonalization.
pub const ED_MAX_QUBITS: usize = 16;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// `|| H v - E v ||` of the returned vector.
    pub residual: f64,
}

pub fn ground_energy(h: &Hamiltonian) -> Result<f64> {
    Ok(ground_state(h)?.energy)
}

/// Smallest eigenpair of `h`.
pub fn ground_state(h: &Hamiltonian) -> Result<GroundState> {
    let n = h.num_qubits();
    if n > ED_MAX_QUBITS {
        return Err(Error::SizeLimit(format!("exact diagonalization limited to {ED_MAX_QUBITS} qubits")));
    }
    let (energy, vec) = if n <= DENSE_ED_MAX_QUBITS { dense_ground(h) } else { lanczos_ground(h) };
    let state = StateVector::from_amplitudes(n, vec)?;
    let hv = state.apply_hamiltonian(h);
    let residual = hv
        .amplitudes()
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(GroundState { energy, state, residual })
}

fn dense_ground(h: &Hamiltonian) -> (f64, Vec<Complex64>) {
    let eig = h.matrix().symmetric_eigen();
    let (i, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc });
    let v: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
    (e, fix_global_phase(v))
}

/// Rotates the largest-magnitude amplitude onto the positive real axis.
fn fix_global_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v.iter().fold(C0, |best, a| if a.norm() > best.norm() + 1e-12 { *a } else { best });
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
    v.iter_mut().for_each(|a| *a = *a * phase / norm);
    v
}

const LANCZOS_KRYLOV: usize = 120;
const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_RESTARTS: usize = 60;

/// Restarted Lanczos with full reorthogonalization; each restart begins from
/// the previous Ritz vector.
fn lanczos_ground(h: &Hamiltonian) -> (f64, Vec<Complex64>) {
    let d = 1usize << h.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c_05);
    let mut start: Vec<Complex64> =
        (0..d).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let mut best = (f64::INFINITY, start.clone());
    let mut hv = vec![C0; d];
    for _ in 0..LANCZOS_RESTARTS {
        normalize(&mut start);
        let m = LANCZOS_KRYLOV.min(d);
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            apply_hamiltonian_into(h, &basis[j], &mut hv);
            let a = dot(&basis[j], &hv).re;
            alpha.push(a);
            let mut w = hv.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnorm = norm(&w);
            if j + 1 == m || bnorm < 1e-12 {
                break;
            }
            beta.push(bnorm);
            w.iter_mut().for_each(|x| *x /= bnorm);
            basis.push(w);
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (i, e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc });
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let mut ritz = vec![C0; d];
        for (coef, b) in y.iter().zip(&basis) {
            ritz.iter_mut().zip(b).for_each(|(r, x)| *r += x * *coef);
        }
        normalize(&mut ritz);
        apply_hamiltonian_into(h, &ritz, &mut hv);
        let res = hv.iter().zip(&ritz).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
        best = (e, ritz.clone());
        if res < LANCZOS_TOL {
            break;
        }
        start = ritz;
    }
    (best.0, fix_global_phase(best.1))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// Reduced density matrix on `region` (qubits in increasing order form the local index bits).
pub fn reduced_density_matrix(psi: &StateVector, region: QubitMask) -> DMatrix<Complex64> {
    let a = qubits_of(region);
    let rest = qubits_of(full_mask(psi.num_qubits()) & !region);
    let spread = |bits: usize, qs: &[usize]| -> usize {
        qs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &q)| 1usize << q).sum()
    };
    let da = 1usize << a.len();
    let a_off: Vec<usize> = (0..da).map(|l| spread(l, &a)).collect();
    let amps = psi.amplitudes();
    let mut rho = DMatrix::from_element(da, da, C0);
    for r in 0..1usize << rest.len() {
        let base = spread(r, &rest);
        for i in 0..da {
            let ai = amps[base + a_off[i]];
            if ai == C0 {
                continue;
            }
            for j in 0..da {
                rho[(i, j)] += ai * amps[base + a_off[j]].conj();
            }
        }
    }
    rho
}

fn check_region(n: usize, region: QubitMask) -> Result<()> {
    let full = full_mask(n);
    if region == 0 || region & full == full || region & !full != 0 {
        return Err(Error::Invalid(format!("region {:#b} must be a proper nonempty subset", region)));
    }
    Ok(())
}

/// Eigenvalues of the reduced state on the smaller side of the cut.
fn schmidt_spectrum(psi: &StateVector, region: QubitMask) -> Result<Vec<f64>> {
    let n = psi.num_qubits();
    check_region(n, region)?;
    let side = if region.count_ones() as usize * 2 > n { full_mask(n) & !region } else { region };
    Ok(reduced_density_matrix(psi, side).symmetric_eigen().eigenvalues.iter().copied().collect())
}

const EIGEN_CUTOFF: f64 = 1e-12;

/// Von Neumann entropy in nats.
pub fn entanglement_entropy(psi: &StateVector, region: QubitMask) -> Result<f64> {
    Ok(schmidt_spectrum(psi, region)?
        .into_iter()
        .filter(|&p| p > EIGEN_CUTOFF)
        .map(|p| -p * p.ln())
        .sum())
}

/// `S_A + S_B + S_C - S_AB - S_BC - S_CA + S_ABC` in nats.
pub fn topological_entropy(psi: &StateVector, a: QubitMask, b: QubitMask, c: QubitMask) -> Result<f64> {
    if a & b != 0 || b & c != 0 || a & c != 0 {
        return Err(Error::Invalid("regions must be pairwise disjoint".into()));
    }
    let full = full_mask(psi.num_qubits());
    let s = |m: QubitMask| if m == full { Ok(0.0) } else { entanglement_entropy(psi, m) };
    Ok(s(a)? + s(b)? + s(c)? - s(a | b)? - s(b | c)? - s(c | a)? + s(a | b | c)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaLawCheck {
    /// Entropy in bits.
    pub entropy: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Compares `S_A` (bits) of the circuit state with `χ · |∂A|`.
pub fn area_law_check(c: &Circuit, theta: &[f64], cut: QubitMask, boundary_size: usize) -> Result<AreaLawCheck> {
    let psi = run(c, theta)?;
    let entropy = entanglement_entropy(&psi, cut)? / std::f64::consts::LN_2;
    let bound = (c.max_local_depth() * boundary_size) as f64;
    Ok(AreaLawCheck { entropy, bound, ok: entropy <= bound + 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::mask_of;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn merging_and_range() {
        let h = Hamiltonian::new(2, vec![(1.0, p("ZI")), (0.5, p("-ZI")), (2.0, p("XX"))]).unwrap();
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[0].0, 0.5);
        assert_eq!(h.range(), 2);
        assert!(Hamiltonian::new(1, vec![(1.0, p("iZ"))]).is_err());
    }

    #[test]
    fn lattice_counts_and_indexing() {
        let l = ToricLattice::new(3, 3).unwrap();
        assert_eq!(l.num_qubits(), 12);
        assert_eq!(l.plaquettes().len(), 4);
        assert_eq!(l.vertex_operators().len(), 9);
        assert_eq!(l.plaquette(0, 0), Plaquette { top: 0, left: 2, right: 3, bottom: 5 });
        assert_eq!(l.plaquette(1, 1), Plaquette { top: 6, left: 8, right: 9, bottom: 11 });
        assert_eq!(l.vertex_edges(1, 1), vec![3, 5, 6, 8]);
        assert_eq!(l.vertex_edges(0, 0), vec![0, 2]);
        assert_eq!(l.vertex_edges(2, 1), vec![8, 10, 11]);
    }

    #[test]
    fn toric_terms() {
        let l = ToricLattice::new(3, 3).unwrap();
        let h0 = toric_code(&l, Field::new(0.0, 0.0, 0.0), None).unwrap();
        assert_eq!(h0.terms().len(), 13);
        assert!(h0.terms().iter().all(|(c, _)| *c == -1.0));
        assert_eq!(h0.range(), 4);
        let h = toric_code(&l, Field::new(0.0, 0.0, 0.1), None).unwrap();
        assert_eq!(h.terms().len(), 25);
        assert!(h.terms()[..13].iter().all(|(c, _)| (*c + 0.9).abs() < 1e-15));
        assert!(h.terms()[13..].iter().all(|(c, q)| *c == -0.1 && q.weight() == 1));
        for (_, a) in h0.terms() {
            for (_, b) in h0.terms() {
                assert!(a.commutes(b).unwrap());
            }
        }
    }

    #[test]
    fn tiny_ground_states() {
        let g = ground_state(&Hamiltonian::new(1, vec![(-1.0, p("Z"))]).unwrap()).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert!((g.state.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        let g = ground_state(&Hamiltonian::new(1, vec![(-1.0, p("X"))]).unwrap()).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.state.amplitudes()[0].re - s).abs() < 1e-12);
        assert!((g.state.amplitudes()[1].re - s).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(
            2,
            vec![Complex64::new(s, 0.0), C0, C0, Complex64::new(s, 0.0)],
        )
        .unwrap();
        assert!((entanglement_entropy(&bell, mask_of(&[0])).unwrap() - 2f64.ln()).abs() < 1e-12);
        let zero = StateVector::zero(3).unwrap();
        assert!(entanglement_entropy(&zero, mask_of(&[1])).unwrap().abs() < 1e-12);
        assert!(entanglement_entropy(&zero, 0).is_err());
        assert!(entanglement_entropy(&zero, 0b111).is_err());
        let t = topological_entropy(&zero, mask_of(&[0]), mask_of(&[1]), mask_of(&[2])).unwrap();
        assert!(t.abs() < 1e-12);
        assert!(topological_entropy(&zero, 0b11, 0b10, 0b100).is_err());
    }
}
