use std::f64::consts::TAU;

use super::{euler_zxz, CircuitIR, CircuitOp, NativeProgram};
use crate::error::{Error, Result};
use crate::native_gates::{cnot_sequence, swap_sequence, NativeGate};

/// Expands a routed circuit into native gates.
///
/// One-qubit gates become `Z(φ2) X(θ) Z(φ1)` (zero angles dropped), CNOT the
/// 9-gate construction, SWAP three of those. Global phases are summed into
/// [`NativeProgram::global_phase`].
pub fn lower(ir: &CircuitIR) -> Result<NativeProgram> {
    let mut gates = Vec::new();
    let mut phase = 0.0;
    for op in &ir.ops {
        match op {
            CircuitOp::SingleQubit { u, qubit } => {
                let a = euler_zxz(u)?;
                for g in [
                    NativeGate::z(a.phi2, *qubit),
                    NativeGate::x(a.theta, *qubit),
                    NativeGate::z(a.phi1, *qubit),
                ] {
                    if g.angle() != 0.0 {
                        gates.push(g);
                    }
                }
                phase += a.alpha;
            }
            CircuitOp::Cnot { control, target } => {
                if !control.is_adjacent(*target) {
                    return Err(Error::NonAdjacent(control.get(), target.get()));
                }
                let s = cnot_sequence(*control, *target)?;
                gates.extend(s.gates);
                phase += s.global_phase;
            }
            CircuitOp::Swap { a, b } => {
                if !a.is_adjacent(*b) {
                    return Err(Error::NonAdjacent(a.get(), b.get()));
                }
                let s = swap_sequence(*a, *b)?;
                gates.extend(s.gates);
                phase += s.global_phase;
            }
            CircuitOp::Native { gate } => gates.push(*gate),
        }
    }
    NativeProgram::from_gates(ir.n_qubits, gates, phase.rem_euclid(TAU))
}
