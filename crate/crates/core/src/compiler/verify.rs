use serde::Serialize;

use super::{lower, route, schedule_program, CircuitIR, GateCounts, LinearTopology, ScheduleOptions};
use crate::constants::{MAX_PULSE_QUBITS, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::native_gates::DeviceParams;
use crate::pulse_engine::evolve;
use crate::qstate::{gate_fidelity, phase_distance, UnitaryMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyLevel {
    Ideal,
    Native,
    Pulse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub distance: f64,
    pub fidelity: f64,
}

impl Comparison {
    pub fn between(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<Self> {
        Ok(Comparison {
            distance: phase_distance(u, v)?,
            fidelity: gate_fidelity(u, v)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub version: &'static str,
    pub params: DeviceParams,
    pub options: ScheduleOptions,
    pub level: VerifyLevel,
    pub n_qubits: usize,
    pub ops: usize,
    /// Unitarity defect of the ideal circuit operator.
    pub ideal_unitarity_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_counts: Option<GateCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal_vs_native: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal_vs_pulse: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub native_vs_pulse: Option<Comparison>,
}

/// Runs the pipeline up to `level` and compares the operators it produces.
pub fn verify(
    ir: &CircuitIR,
    p: &DeviceParams,
    level: VerifyLevel,
    opts: &ScheduleOptions,
) -> Result<VerifyReport> {
    let n = ir.n_qubits;
    let limit = if level == VerifyLevel::Pulse {
        MAX_PULSE_QUBITS
    } else {
        MAX_QUBITS
    };
    if n > limit {
        return Err(Error::TooManyQubits { n, max: limit });
    }
    let ideal = ir.ideal_unitary()?;
    let mut report = VerifyReport {
        version: crate::VERSION,
        params: *p,
        options: *opts,
        level,
        n_qubits: n,
        ops: ir.ops.len(),
        ideal_unitarity_error: ideal.unitarity_error(),
        gate_counts: None,
        segments: None,
        pulse_duration: None,
        ideal_vs_native: None,
        ideal_vs_pulse: None,
        native_vs_pulse: None,
    };
    if level == VerifyLevel::Ideal {
        return Ok(report);
    }
    let prog = lower(&route(ir, &LinearTopology::new(n))?)?;
    let native = prog.sequential_unitary()?;
    report.gate_counts = Some(prog.gate_counts());
    report.ideal_vs_native = Some(Comparison::between(&ideal, &native)?);
    if level == VerifyLevel::Pulse {
        let sched = schedule_program(&prog, p, opts)?;
        let pulse = evolve(&sched, p)?;
        report.segments = Some(sched.len());
        report.pulse_duration = Some(sched.total_duration());
        report.ideal_vs_pulse = Some(Comparison::between(&ideal, &pulse)?);
        report.native_vs_pulse = Some(Comparison::between(&native, &pulse)?);
    }
    Ok(report)
}
