use dxdq::qstate::{
    apply, compose, embed, gate_fidelity, haar_unitary, phase_distance, q, StateVector,
    UnitaryMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unitary(dim: usize, seed: u64) -> UnitaryMatrix {
    haar_unitary(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_state(n: usize, seed: u64) -> StateVector {
    let u = unitary(1 << n, seed);
    apply(&u, &StateVector::zero(n).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_is_associative(n in 1usize..=3, s1: u64, s2: u64, s3: u64) {
        let d = 1 << n;
        let (a, b, c) = (unitary(d, s1), unitary(d, s2), unitary(d, s3));
        let left = compose(&[compose(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = compose(&[a, compose(&[b, c]).unwrap()]).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
    }

    #[test]
    fn disjoint_gates_commute(n in 2usize..=5, a in 1usize..=5, b in 1usize..=5, s1: u64, s2: u64) {
        prop_assume!(a <= n && b <= n && a != b);
        let ga = embed(&unitary(2, s1), &[q(a)], n).unwrap();
        let gb = embed(&unitary(2, s2), &[q(b)], n).unwrap();
        let ab = ga.mul(&gb).unwrap();
        let ba = gb.mul(&ga).unwrap();
        prop_assert!(ab.max_abs_diff(&ba).unwrap() < 1e-12);
    }

    #[test]
    fn unitaries_preserve_norm(n in 1usize..=5, s1: u64, s2: u64) {
        let psi = random_state(n, s1);
        let out = apply(&unitary(1 << n, s2), &psi).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_application_matches_embedding(n in 2usize..=5, first in 1usize..=4, s1: u64, s2: u64) {
        prop_assume!(first < n);
        let g = unitary(4, s1);
        let targets = [q(first), q(first + 1)];
        let mut psi = random_state(n, s2);
        let want = apply(&embed(&g, &targets, n).unwrap(), &psi).unwrap();
        psi.apply_local(&g, &targets).unwrap();
        let err = psi
            .amplitudes()
            .iter()
            .zip(want.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn phase_distance_is_a_projective_metric(s1: u64, s2: u64, phase in -10.0f64..10.0) {
        let (u, v) = (unitary(4, s1), unitary(4, s2));
        let d_uv = phase_distance(&u, &v).unwrap();
        prop_assert!((d_uv - phase_distance(&v, &u).unwrap()).abs() < 1e-12);
        prop_assert!(phase_distance(&u, &u.with_global_phase(phase)).unwrap() < 1e-12);
        prop_assert!(d_uv >= 0.0);
    }

    #[test]
    fn fidelity_is_bounded_and_phase_blind(s1: u64, s2: u64, phase in -10.0f64..10.0) {
        let (u, v) = (unitary(4, s1), unitary(4, s2));
        let f = gate_fidelity(&u, &v).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((gate_fidelity(&u, &u.with_global_phase(phase)).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn basis_states_follow_qubit_one_as_msb() {
    let s = StateVector::from_bits("100").unwrap();
    assert_eq!(s.amplitude(4).re, 1.0);
    let flipped = apply(&embed(&dxdq::qstate::pauli_x(), &[q(3)], 3).unwrap(), &s).unwrap();
    assert_eq!(flipped.amplitude(5).re, 1.0);
}
