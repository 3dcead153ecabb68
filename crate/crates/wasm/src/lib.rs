//! Browser bindings. Every export takes plain numbers or text and returns a
//! JSON string, so the page needs no generated type glue beyond the loader.

use serde_json::json;
use wasm_bindgen::prelude::*;

use dxdq::compiler::{
    lower, route, schedule_program, text, LinearTopology, ScheduleOptions, TunnelingMode,
};
use dxdq::constants::MAX_PULSE_QUBITS;
use dxdq::noise_lab::{
    coherence_experiment, free_half_decay_time, ControlMode, ExperimentConfig, NoiseModel,
};
use dxdq::pulse_engine::{evolve, freezing_sweep, resonant_tau};
use dxdq::qstate::phase_distance;
use dxdq::DeviceParams;

/// Keeps a click from freezing the tab.
const MAX_BROWSER_TRAJ: usize = 20_000;
const MAX_SWEEP_POINTS: usize = 400;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Idle infidelity of one refocused qubit over `total` for `points`
/// log-spaced half-periods in `[tau_min, tau_max]`. Units: ħ = Δ = 1.
pub fn freezing_curve_json(
    delta_e: f64,
    total: f64,
    tau_min: f64,
    tau_max: f64,
    points: usize,
) -> Result<String, String> {
    if !(tau_min > 0.0 && tau_max > tau_min) {
        return Err("need 0 < tau_min < tau_max".into());
    }
    let points = points.clamp(2, MAX_SWEEP_POINTS);
    let p = DeviceParams {
        delta_e,
        ..Default::default()
    };
    p.validate().map_err(err)?;
    let resonances: Vec<f64> = (1..)
        .map(|k| resonant_tau(delta_e, 1.0, k))
        .take_while(|&t| t <= tau_max)
        .filter(|&t| t >= tau_min)
        .collect();
    // The dips are narrow, so the exact resonant points join the grid.
    let ratio = (tau_max / tau_min).ln();
    let mut taus: Vec<f64> = (0..points)
        .map(|i| tau_min * (ratio * i as f64 / (points - 1) as f64).exp())
        .chain(resonances.iter().copied())
        .collect();
    taus.sort_by(f64::total_cmp);
    let pts = freezing_sweep(&p, total, &taus).map_err(err)?;
    Ok(json!({ "points": pts, "resonances": resonances }).to_string())
}

/// Mean coherence for free evolution, bias alternation and π pulses.
pub fn coherence_curves_json(
    sigma_eps: f64,
    tau_c: f64,
    spacing: f64,
    t_max: f64,
    n_traj: usize,
    seed: u64,
) -> Result<String, String> {
    let n_traj = n_traj.clamp(1, MAX_BROWSER_TRAJ);
    let p = DeviceParams::default();
    let model = NoiseModel::ou(sigma_eps, tau_c, seed);
    let mut curves = serde_json::Map::new();
    for mode in ControlMode::ALL {
        let cfg = ExperimentConfig::new(model, mode, spacing, t_max, n_traj);
        let c = coherence_experiment(&cfg, &p).map_err(err)?;
        curves.insert(mode.name().into(), serde_json::to_value(c).map_err(err)?);
    }
    let t_star = free_half_decay_time(sigma_eps, tau_c, 1.0).ok();
    Ok(json!({ "curves": curves, "t_star": t_star, "n_traj": n_traj }).to_string())
}

/// Compiles circuit text and, for small registers, simulates its schedule.
pub fn compile_circuit_json(
    source: &str,
    delta_e: f64,
    tau: f64,
    blocked: bool,
) -> Result<String, String> {
    let ir = text::parse(source).map_err(err)?;
    let n = ir.n_qubits;
    let prog = lower(&route(&ir, &LinearTopology::new(n)).map_err(err)?).map_err(err)?;
    let ideal = ir.ideal_unitary().map_err(err)?;
    let native_distance = phase_distance(&ideal, &prog.sequential_unitary().map_err(err)?).map_err(err)?;
    let mut out = json!({
        "n_qubits": n,
        "gates": prog.gates.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "slices": prog.slices.len(),
        "counts": prog.gate_counts(),
        "native_distance": native_distance,
    });
    if n <= MAX_PULSE_QUBITS {
        let p = DeviceParams {
            delta_e,
            tau,
            ..Default::default()
        };
        let opts = ScheduleOptions {
            tunneling: if blocked {
                TunnelingMode::Blocked
            } else {
                TunnelingMode::Physical
            },
            allow_padding: true,
            ..Default::default()
        };
        let sched = schedule_program(&prog, &p, &opts).map_err(err)?;
        let u = evolve(&sched, &p).map_err(err)?;
        out["pulse_distance"] = json!(phase_distance(&ideal, &u).map_err(err)?);
        out["schedule"] = serde_json::to_value(&sched).map_err(err)?;
        out["duration"] = json!(sched.total_duration());
    }
    Ok(out.to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn freezing_curve(delta_e: f64, total: f64, tau_min: f64, tau_max: f64, points: usize) -> Result<String, JsError> {
    to_js(freezing_curve_json(delta_e, total, tau_min, tau_max, points))
}

#[wasm_bindgen]
pub fn coherence_curves(
    sigma_eps: f64,
    tau_c: f64,
    spacing: f64,
    t_max: f64,
    n_traj: usize,
    seed: u32,
) -> Result<String, JsError> {
    to_js(coherence_curves_json(sigma_eps, tau_c, spacing, t_max, n_traj, seed.into()))
}

#[wasm_bindgen]
pub fn compile_circuit(source: &str, delta_e: f64, tau: f64, blocked: bool) -> Result<String, JsError> {
    to_js(compile_circuit_json(source, delta_e, tau, blocked))
}

#[wasm_bindgen]
pub fn version() -> String {
    dxdq::VERSION.to_string()
}
