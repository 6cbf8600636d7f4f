use bpscope_core::ansatz::{AnsatzSpec, PlaquetteShape};
use bpscope_core::bounds::{is_ladder_layout, ladder_bound, theorem1_bound, theorem2_bound};
use bpscope_core::circuit::{Block, BlockKind, Circuit, Gate};
use bpscope_core::geometry::{find_path_set, straight_wire_path_set, Path, PathSet};
use bpscope_core::models::{entanglement_entropy, ground_energy, toric_code, topological_entropy, Field, Hamiltonian, ToricLattice};
use bpscope_core::pauli::{full_mask, mask_of, Letter, PauliString, QubitMask};
use bpscope_core::simulator::{self, StateVector};
use bpscope_core::twirl::{exact_variance, twirl_step, SupportDistribution};
use proptest::prelude::*;

const LETTERS: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0usize..4, n), 0u8..4)
        .prop_map(|(ls, ph)| PauliString::from_letters(&ls.into_iter().map(|i| LETTERS[i]).collect::<Vec<_>>()).unwrap().with_phase(ph))
}

/// Blocks on one or two qubits with one to three gates each.
fn circuit(n: usize, max_blocks: usize) -> impl Strategy<Value = Circuit> {
    let block = (0..n, 0..n, prop::collection::vec((1usize..4, 1usize..4, any::<bool>()), 1..4));
    prop::collection::vec(block, 1..=max_blocks).prop_map(move |spec| {
        let mut next = 0;
        let blocks = spec
            .into_iter()
            .map(|(a, b, gates)| {
                let qs: Vec<usize> = if a == b { vec![a] } else { vec![a, b] };
                let gates = gates
                    .into_iter()
                    .enumerate()
                    .map(|(g, (l1, l2, both))| {
                        let letters: Vec<Letter> = if qs.len() == 1 {
                            vec![LETTERS[l1]]
                        } else if g == 0 || both {
                            vec![LETTERS[l1], LETTERS[l2]]
                        } else {
                            vec![LETTERS[l1], Letter::I]
                        };
                        next += 1;
                        Gate::param(PauliString::on_qubits(n, &letters, &qs).unwrap(), next - 1).unwrap()
                    })
                    .collect();
                Block::new(gates, BlockKind::Design2).unwrap()
            })
            .collect();
        Circuit::new(n, blocks).unwrap()
    })
}

fn nonempty_subset(c: &Circuit, bits: QubitMask) -> QubitMask {
    let s = bits & c.support();
    if s == 0 {
        1 << c.support().trailing_zeros()
    } else {
        s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_support_within_union(a in pauli(5), b in pauli(5)) {
        let p = a.multiply(&b).unwrap();
        prop_assert_eq!(p.support() & !(a.support() | b.support()), 0);
    }

    #[test]
    fn multiply_is_associative(a in pauli(4), b in pauli(4), c in pauli(4)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_is_symmetric_and_text_roundtrips(a in pauli(6), b in pauli(6)) {
        prop_assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
        prop_assert_eq!(PauliString::parse(&a.to_string(), Some(6)).unwrap(), a);
    }

    #[test]
    fn circuit_support_identities(c in circuit(5, 6), obs in 1u64..32, extra in 0u64..32) {
        let m = c.num_blocks();
        let mut union = 0;
        for k in 0..m {
            let sf = c.forward_residual_support(k).unwrap();
            prop_assert_eq!(sf & !c.blocks()[k].support(), 0);
            prop_assert_eq!(union & sf, 0);
            union |= sf;
            for k2 in 0..m {
                if k != k2 {
                    prop_assert_eq!(c.connecting_support(k, k2).unwrap(), c.connecting_support(k2, k).unwrap());
                }
            }
        }
        prop_assert_eq!(union, c.support());
        prop_assert!(c.max_local_depth() <= c.global_depth());
        let small = c.causal_cone_blocks(obs);
        let large = c.causal_cone_blocks(obs | extra);
        prop_assert!(small.iter().all(|k| large.contains(k)));
    }

    #[test]
    fn twirls_conserve_weight(c in circuit(5, 8), start in 1u64..32) {
        let mut d = SupportDistribution::single(start);
        for b in c.blocks().iter().rev() {
            d = twirl_step(&d, b.support()).unwrap();
            prop_assert!((d.total() - 1.0).abs() < 1e-12);
            prop_assert!(d.weights().iter().all(|(&t, &w)| t != 0 && w >= 0.0));
        }
    }

    #[test]
    fn covered_block_is_invisible(c in circuit(4, 4), bits in 1u64..16, pick in 0usize..64, letter in 1usize..4) {
        let h = Hamiltonian::new(4, vec![(1.0, PauliString::on_qubits(4, &[Letter::Z], &[nonempty_subset(&c, bits).trailing_zeros() as usize]).unwrap())]).unwrap();
        let mu = pick % c.num_params();
        let kd = c.differential_block(mu).unwrap();
        let base = exact_variance(&c, &h, mu).unwrap().total;
        // a later 1-qubit block inside the support of the block before it
        let k = pick % c.num_blocks();
        let q = c.blocks()[k].support().trailing_zeros() as usize;
        let mut blocks = c.blocks().to_vec();
        let extra = Gate::param(PauliString::single(4, q, LETTERS[letter]).unwrap(), c.num_params()).unwrap();
        blocks.insert(k + 1, Block::new(vec![extra], BlockKind::Design2).unwrap());
        let c2 = Circuit::new(4, blocks).unwrap();
        prop_assume!(c2.differential_block(mu).unwrap() == kd);
        let after = exact_variance(&c2, &h, mu).unwrap().total;
        prop_assert!((base - after).abs() < 1e-12 * base.max(1.0), "{} vs {}", base, after);
    }

    #[test]
    fn bounds_are_ordered(c in circuit(6, 7), bits in 1u64..64, pick in 0usize..256, lambda in 0.1f64..3.0) {
        let obs = nonempty_subset(&c, bits);
        let q: Vec<usize> = (0..6).filter(|q| obs >> q & 1 == 1).collect();
        let h = Hamiltonian::new(6, vec![(lambda, PauliString::on_qubits(6, &vec![Letter::Z; q.len()], &q).unwrap())]).unwrap();
        let mu = pick % c.num_params();
        let exact = exact_variance(&c, &h, mu).unwrap().total;
        let t1 = theorem1_bound(&c, &h, mu).unwrap().total;
        let t2 = theorem2_bound(&c, &h, mu).unwrap().total;
        prop_assert!(exact >= t1 * (1.0 - 1e-12), "exact {} < theorem1 {}", exact, t1);
        prop_assert!(t1 >= t2 * (1.0 - 1e-12), "theorem1 {} < theorem2 {}", t1, t2);
        prop_assert!(t2 >= 0.0);
        let scaled = h.scaled(1.7);
        let t1s = theorem1_bound(&c, &scaled, mu).unwrap().total;
        let t2s = theorem2_bound(&c, &scaled, mu).unwrap().total;
        prop_assert!((t1s - 1.7f64.powi(2) * t1).abs() <= 1e-12 * t1s.max(1e-300));
        prop_assert!((t2s - 1.7f64.powi(2) * t2).abs() <= 1e-12 * t2s.max(1e-300));
        if is_ladder_layout(&c) {
            let lb = ladder_bound(&c, &h, mu).unwrap().total;
            prop_assert!(t1 >= lb * (1.0 - 1e-12), "theorem1 {} < ladder {}", t1, lb);
        }
    }

    #[test]
    fn search_results_are_legal(c in circuit(6, 8), bits in 1u64..64, pick in 0usize..64) {
        let obs = nonempty_subset(&c, bits);
        let kd = pick % c.num_blocks();
        match find_path_set(&c, kd, obs) {
            Some(ps) => {
                prop_assert!(c.causal_cone_blocks(obs).contains(&kd));
                ps.validate(&c, kd, obs).unwrap();
                let wires = straight_wire_path_set(&c, obs);
                if wires.validate(&c, kd, obs).is_ok() {
                    prop_assert!(ps.exponent(&c).unwrap() <= wires.exponent(&c).unwrap() + 1e-12);
                }
                // a path over blocks not yet used never lowers the exponent
                let used = ps.nodes();
                for k in 0..c.num_blocks() {
                    let fresh = !used.contains(&k)
                        && c.forward_residual_support(k).unwrap() != 0
                        && c.backward_residual_support(k).unwrap() != 0;
                    if fresh {
                        let mut more = ps.paths.clone();
                        more.push(Path { blocks: vec![k] });
                        prop_assert!(PathSet::new(more).exponent(&c).unwrap() >= ps.exponent(&c).unwrap());
                    }
                }
            }
            None => prop_assert!(!c.causal_cone_blocks(obs).contains(&kd)),
        }
    }

    #[test]
    fn gates_preserve_norm(c in circuit(5, 6), seed in any::<u64>()) {
        let theta: Vec<f64> = (0..c.num_params()).map(|i| ((seed.wrapping_mul(i as u64 + 7) % 6283) as f64) / 1000.0).collect();
        let mut psi = StateVector::zero(5).unwrap();
        for b in c.blocks() {
            for g in b.gates() {
                psi.apply_rotation(g.generator(), g.resolve(&theta)).unwrap();
                prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn entropy_is_symmetric_and_variational(c in circuit(6, 6), region in 1u64..63, seed in any::<u64>()) {
        let theta: Vec<f64> = (0..c.num_params()).map(|i| ((seed.rotate_left(i as u32) % 6283) as f64) / 1000.0).collect();
        let psi = simulator::run(&c, &theta).unwrap();
        let a = entanglement_entropy(&psi, region).unwrap();
        let b = entanglement_entropy(&psi, full_mask(6) & !region).unwrap();
        prop_assert!((a - b).abs() < 1e-8);
        let h = Hamiltonian::new(6, vec![(1.0, PauliString::parse("ZZ@[0,1]", Some(6)).unwrap()), (-0.5, PauliString::parse("X@[3]", Some(6)).unwrap())]).unwrap();
        prop_assert!(ground_energy(&h).unwrap() <= psi.expectation(&h).unwrap() + 1e-9);
    }
}

#[test]
fn toric_stabilizers_commute() {
    for (r, cc) in [(2, 2), (3, 3), (4, 3)] {
        let lattice = ToricLattice::new(r, cc).unwrap();
        let h = toric_code(&lattice, Field::new(0.0, 0.0, 0.0), None).unwrap();
        for (_, a) in h.terms() {
            for (_, b) in h.terms() {
                assert!(a.commutes(b).unwrap());
            }
        }
    }
}

#[test]
fn product_states_have_no_topological_entropy() {
    let mut psi = StateVector::zero(6).unwrap();
    for q in 0..6 {
        psi.apply_rotation(&PauliString::single(6, q, Letter::Y).unwrap(), 0.3 * q as f64 + 0.1).unwrap();
    }
    let s = topological_entropy(&psi, mask_of(&[0, 1]), mask_of(&[2]), mask_of(&[4, 5])).unwrap();
    assert!(s.abs() < 1e-8);
}

#[test]
fn plaquette_families_have_constant_local_depth() {
    for shape in [PlaquetteShape::Claw, PlaquetteShape::Ushape] {
        let depths: Vec<usize> = [(2, 2), (3, 3), (4, 3)]
            .into_iter()
            .map(|(rows, cols)| {
                let spec = match shape {
                    PlaquetteShape::Claw => AnsatzSpec::FldcClaw { rows, cols },
                    PlaquetteShape::Ushape => AnsatzSpec::FldcUshape { rows, cols },
                };
                let a = spec.build().unwrap();
                assert_eq!(a.circuit.support(), full_mask(a.circuit.num_qubits()));
                a.circuit.max_local_depth()
            })
            .collect();
        assert!(depths.windows(2).all(|w| w[0] == w[1]) || depths[1..].windows(2).all(|w| w[0] == w[1]), "{shape:?}: {depths:?}");
        assert!(depths.iter().all(|&d| d <= 4), "{shape:?}: {depths:?}");
    }
}

#[test]
fn gldc_depth_grows_linearly() {
    let depth = |r: usize| {
        AnsatzSpec::Gldc { rows: 3, cols: 3, shape: PlaquetteShape::Claw, repetitions: Some(r) }.build().unwrap().circuit.global_depth()
    };
    let (d1, d2, d3) = (depth(1), depth(2), depth(3));
    assert_eq!(d2 - d1, d3 - d2);
    assert!(d2 > d1);
}

#[test]
fn ladders_are_detected() {
    for n in 2..9 {
        let a = AnsatzSpec::Ladder { qubits: n }.build().unwrap();
        assert!(is_ladder_layout(&a.circuit));
        assert_eq!(a.circuit.support(), full_mask(n));
    }
    for spec in [AnsatzSpec::TwoWayLadder { qubits: 5 }, AnsatzSpec::Brickwall { qubits: 5, layers: 3 }] {
        let c = spec.build().unwrap().circuit;
        assert_eq!(c.support(), full_mask(5));
    }
    let brick = AnsatzSpec::Brickwall { qubits: 6, layers: 4 }.build().unwrap().circuit;
    assert_eq!(brick.max_local_depth(), brick.global_depth());
}
