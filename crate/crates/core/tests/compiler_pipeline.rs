mod common;

use dxdq::compiler::{lower, route, text, verify, CircuitIR, LinearTopology, VerifyLevel};
use dxdq::qstate::{phase_distance, q, UnitaryMatrix};
use dxdq::{DeviceParams, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sliced_and_sequential_products_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let c = common::random_circuit(&mut rng, 4, 8);
        let prog = lower(&route(&c, &LinearTopology::new(4)).unwrap()).unwrap();
        for s in &prog.slices {
            let mut seen = Vec::new();
            for &i in &s.gates {
                for qb in prog.gates[i].support() {
                    assert!(!seen.contains(&qb));
                    seen.push(qb);
                }
            }
        }
        let d = prog
            .sliced_unitary()
            .unwrap()
            .max_abs_diff(&prog.sequential_unitary().unwrap())
            .unwrap();
        assert!(d < 1e-12, "{d}");
    }
}

#[test]
fn swap_pairs_from_routing_cancel() {
    let mut c = CircuitIR::new(5).unwrap();
    c.swap(q(1), q(5)).unwrap().swap(q(5), q(1)).unwrap();
    let r = route(&c, &LinearTopology::new(5)).unwrap();
    assert!(r.is_routed());
    let u = r.ideal_unitary().unwrap();
    assert!(u.max_abs_diff(&UnitaryMatrix::identity_qubits(5)).unwrap() < 1e-12);
}

#[test]
fn routing_restores_positions() {
    // Any leftover permutation would show up as a large distance, since the
    // random one-qubit gates distinguish the wires.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let mut c = common::random_circuit(&mut rng, 5, 6);
        c.cnot(q(5), q(1)).unwrap();
        let r = route(&c, &LinearTopology::new(5)).unwrap();
        let d = phase_distance(&r.ideal_unitary().unwrap(), &c.ideal_unitary().unwrap()).unwrap();
        assert!(d < 1e-9, "{d}");
    }
}

#[test]
fn text_to_report() {
    let src = "# GHZ\nn 3\nU 1 0.7071067811865476 0 0.7071067811865476 0 0.7071067811865476 0 -0.7071067811865476 0\nCNOT 1 2\nCNOT 1 3\n";
    let ir = text::parse(src).unwrap();
    let r = verify(&ir, &DeviceParams::default(), VerifyLevel::Native, &Default::default()).unwrap();
    let native = r.ideal_vs_native.unwrap();
    assert!(native.distance < 1e-9);
    assert!((native.fidelity - 1.0).abs() < 1e-12);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["params"]["delta_e"], 10.0);
    assert_eq!(json["version"], dxdq::VERSION);
    assert!(json.get("ideal_vs_pulse").is_none());
}

#[test]
fn verify_rejects_oversized_pulse_runs() {
    let ir = CircuitIR::new(12).unwrap();
    let err = verify(&ir, &DeviceParams::default(), VerifyLevel::Pulse, &Default::default())
        .unwrap_err();
    assert_eq!(err, Error::TooManyQubits { n: 12, max: 6 });
    assert_eq!(err.kind(), "too_many_qubits");
}
