use bpscope_core::models::{ground_state, toric_code, topological_entropy, Field, ToricLattice};
use bpscope_core::pauli::mask_of;

#[test]
fn stabilizer_ground_state() {
    let lattice = ToricLattice::new(3, 3).unwrap();
    let h = toric_code(&lattice, Field::new(0.0, 0.0, 0.0), None).unwrap();
    let g = ground_state(&h).unwrap();
    assert!((g.energy + 13.0).abs() < 1e-8, "{}", g.energy);
    assert!(g.residual < 1e-6);
    let s = topological_entropy(&g.state, mask_of(&[3, 5]), mask_of(&[8]), mask_of(&[6])).unwrap();
    assert!((s + std::f64::consts::LN_2).abs() < 1e-6, "{s}");
}
