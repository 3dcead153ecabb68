use dxdq::compiler::{lower, schedule_program, CircuitIR, ScheduleOptions, TunnelingMode};
use dxdq::native_gates::{x_matrix, NativeGate};
use dxdq::pulse_engine::{
    evolve, evolve_state, freezing_sweep, idle_infidelity, refocusing_schedule, resonant_tau,
    PulseSegment, Schedule,
};
use dxdq::qstate::{apply, embed, phase_distance, q, StateVector};
use dxdq::DeviceParams;
use proptest::prelude::*;

fn tunneling_only(n: usize, t: f64) -> Schedule {
    let mut seg = PulseSegment::idle(n, t);
    seg.tunneling_on = vec![true; n];
    let mut s = Schedule::new(n);
    s.push(seg).unwrap();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_tunneling_is_an_x_rotation(t in 0.0f64..20.0, delta in 0.01f64..3.0) {
        let p = DeviceParams { delta, ..Default::default() };
        let u = evolve(&tunneling_only(2, t), &p).unwrap();
        let x = x_matrix(2.0 * delta * t / p.hbar);
        prop_assert!(u.max_abs_diff(&x.kron(&x)).unwrap() < 1e-10);
    }

    #[test]
    fn even_refocusing_without_tunneling_is_identity(
        delta_e in 0.1f64..500.0,
        tau in 1e-4f64..1.0,
        half_periods in 1usize..8,
    ) {
        let p = DeviceParams { delta: 0.0, delta_e, tau, ..Default::default() };
        let s = refocusing_schedule(&[q(1), q(2)], 2, 2.0 * half_periods as f64 * tau, &p, -1.0).unwrap();
        let u = evolve(&s, &p).unwrap();
        prop_assert!(u.max_abs_diff(&dxdq::UnitaryMatrix::identity(4)).unwrap() < 1e-12);
    }

    #[test]
    fn state_and_operator_evolution_agree(seed: u64, t in 0.1f64..3.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = DeviceParams::default();
        let mut s = Schedule::new(3);
        for _ in 0..4 {
            let mut seg = PulseSegment::idle(3, t * rng.random_range(0.1..1.0));
            for b in seg.bias.iter_mut() { *b = rng.random_range(-5.0..5.0); }
            for on in seg.tunneling_on.iter_mut() { *on = rng.random_bool(0.5); }
            for j in seg.coupling.iter_mut() { *j = rng.random_range(-1.0..1.0); }
            s.push(seg).unwrap();
        }
        let psi = StateVector::from_bits("101").unwrap();
        let a = evolve_state(&s, &p, &psi).unwrap();
        let b = apply(&evolve(&s, &p).unwrap(), &psi).unwrap();
        prop_assert!(a.phase_distance(&b).unwrap() < 1e-10);
    }
}

#[test]
fn resonant_refocusing_freezes_idle_qubits() {
    let p = DeviceParams { delta_e: 30.0, ..Default::default() };
    let tau = resonant_tau(p.delta_e, p.hbar, 1);
    let total = 48.0 * tau;
    let pts = freezing_sweep(&p, total, &[tau, 0.75 * tau]).unwrap();
    assert!(pts[0].unrefocused > 0.1, "{pts:?}");
    assert!(pts[0].refocused < 1e-2, "{pts:?}");
    assert!(pts[0].refocused < 0.1 * pts[1].refocused, "{pts:?}");
}

#[test]
fn resonant_idle_improves_with_bias() {
    let mut last = f64::INFINITY;
    for ratio in [10.0, 30.0, 100.0] {
        let p = DeviceParams { delta_e: ratio, tau: resonant_tau(ratio, 1.0, 1), ..Default::default() };
        let s = refocusing_schedule(&[q(1)], 1, 40.0 * p.tau, &p, 1.0).unwrap();
        let inf = idle_infidelity(&evolve(&s, &p).unwrap());
        assert!(inf < last, "{ratio}: {inf} vs {last}");
        last = inf;
    }
}

#[test]
fn schedule_json_round_trip() {
    let mut c = CircuitIR::new(2).unwrap();
    c.cnot(q(2), q(1)).unwrap();
    let p = DeviceParams::default();
    let s = schedule_program(&lower(&c).unwrap(), &p, &ScheduleOptions::default()).unwrap();
    let back = Schedule::from_json(&s.to_json().unwrap()).unwrap();
    assert_eq!(back, s);
    let csv = s.to_csv();
    assert_eq!(csv.lines().count(), s.len() + 1);
    assert!(csv.starts_with("t_start,t_end,bias_1,bias_2,tunneling_1,tunneling_2,coupling_1\n"));
}

#[test]
fn blocked_x_gate_runs_only_on_its_qubit() {
    let p = DeviceParams::default();
    let prog = dxdq::compiler::NativeProgram::from_gates(3, vec![NativeGate::x(1.3, q(2))], 0.0).unwrap();
    let opts = ScheduleOptions { tunneling: TunnelingMode::Blocked, ..Default::default() };
    let s = schedule_program(&prog, &p, &opts).unwrap();
    assert!(s.segments.iter().all(|seg| !seg.tunneling_on[0] && !seg.tunneling_on[2]));
    let want = embed(&x_matrix(1.3), &[q(2)], 3).unwrap();
    assert!(phase_distance(&evolve(&s, &p).unwrap(), &want).unwrap() < 1e-12);
}
