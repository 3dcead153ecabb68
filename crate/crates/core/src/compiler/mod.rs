//! Lowering of abstract circuits onto the native gate set of a linear chain.
//!
//! The pipeline is `route` (bring CNOT/SWAP partners next to each other),
//! `lower` (Euler angles for one-qubit gates, the 9-gate CNOT construction,
//! greedy time slices), and `schedule_program` (refocusing-aware pulse
//! schedule). `verify` runs the whole chain and compares unitaries.

mod euler;
mod lower;
mod route;
mod schedule;
pub mod text;
mod verify;

pub use euler::{euler_zxz, EulerAngles};
pub use lower::lower;
pub use route::route;
pub use schedule::{schedule_program, ScheduleOptions, TunnelingMode, ZDriveMode};
pub use verify::{verify, Comparison, VerifyLevel, VerifyReport};

use serde::Serialize;

use crate::constants::{MAX_QUBITS, TOL};
use crate::error::{Error, Result};
use crate::native_gates::NativeGate;
use crate::qstate::{cnot_matrix, swap_matrix, QubitIndex, StateVector, UnitaryMatrix};

/// One abstract operation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CircuitOp {
    SingleQubit { u: UnitaryMatrix, qubit: QubitIndex },
    Cnot { control: QubitIndex, target: QubitIndex },
    Swap { a: QubitIndex, b: QubitIndex },
    Native { gate: NativeGate },
}

impl CircuitOp {
    pub fn support(&self) -> Vec<QubitIndex> {
        match self {
            CircuitOp::SingleQubit { qubit, .. } => vec![*qubit],
            CircuitOp::Cnot { control, target } => vec![*control, *target],
            CircuitOp::Swap { a, b } => vec![*a, *b],
            CircuitOp::Native { gate } => gate.support(),
        }
    }

    /// Exact operator on an `n`-qubit register.
    pub fn unitary(&self, n: usize) -> Result<UnitaryMatrix> {
        match self {
            CircuitOp::SingleQubit { u, qubit } => crate::qstate::embed(u, &[*qubit], n),
            CircuitOp::Cnot { control, target } => cnot_matrix(n, *control, *target),
            CircuitOp::Swap { a, b } => swap_matrix(n, *a, *b),
            CircuitOp::Native { gate } => gate.embedded(n),
        }
    }

    /// Left-multiplies `acc` by this operation.
    fn apply_to(&self, acc: &mut UnitaryMatrix) -> Result<()> {
        let n = acc.n_qubits();
        match self {
            CircuitOp::SingleQubit { u, qubit } => acc.apply_local(u, &[*qubit]),
            CircuitOp::Native { gate } => acc.apply_local(&gate.matrix(), &gate.support()),
            _ => {
                *acc = self.unitary(n)?.mul(acc)?;
                Ok(())
            }
        }
    }
}

/// Ordered circuit on `n_qubits`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitIR {
    pub n_qubits: usize,
    pub ops: Vec<CircuitOp>,
}

impl CircuitIR {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n: n_qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(CircuitIR {
            n_qubits,
            ops: Vec::new(),
        })
    }

    /// Validates and appends.
    pub fn push(&mut self, op: CircuitOp) -> Result<&mut Self> {
        self.check_op(&op)?;
        self.ops.push(op);
        Ok(self)
    }

    pub fn single(&mut self, u: UnitaryMatrix, qubit: QubitIndex) -> Result<&mut Self> {
        self.push(CircuitOp::SingleQubit { u, qubit })
    }

    pub fn cnot(&mut self, control: QubitIndex, target: QubitIndex) -> Result<&mut Self> {
        self.push(CircuitOp::Cnot { control, target })
    }

    pub fn swap(&mut self, a: QubitIndex, b: QubitIndex) -> Result<&mut Self> {
        self.push(CircuitOp::Swap { a, b })
    }

    pub fn native(&mut self, gate: NativeGate) -> Result<&mut Self> {
        self.push(CircuitOp::Native { gate })
    }

    fn check_op(&self, op: &CircuitOp) -> Result<()> {
        let n = self.n_qubits;
        match op {
            CircuitOp::SingleQubit { u, qubit } => {
                qubit.check(n)?;
                if u.dim() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        found: u.dim(),
                    });
                }
                let err = u.unitarity_error();
                if err > TOL.algebraic {
                    return Err(Error::NotUnitary(err));
                }
            }
            CircuitOp::Cnot { control, target } => {
                control.check(n)?;
                target.check(n)?;
                if control == target {
                    return Err(Error::ControlEqualsTarget(control.get()));
                }
            }
            CircuitOp::Swap { a, b } => {
                a.check(n)?;
                b.check(n)?;
                if a == b {
                    return Err(Error::DuplicateTarget(a.get()));
                }
            }
            CircuitOp::Native { gate } => gate.check(n)?,
        }
        Ok(())
    }

    /// Exact circuit unitary.
    pub fn ideal_unitary(&self) -> Result<UnitaryMatrix> {
        let mut u = UnitaryMatrix::identity_qubits(self.n_qubits);
        for op in &self.ops {
            op.apply_to(&mut u)?;
        }
        Ok(u)
    }

    /// Exact output state for `input`.
    pub fn apply_ideal(&self, input: &StateVector) -> Result<StateVector> {
        crate::qstate::apply(&self.ideal_unitary()?, input)
    }

    /// True when every two-qubit op acts on a chain link.
    pub fn is_routed(&self) -> bool {
        self.ops.iter().all(|op| match op {
            CircuitOp::Cnot { control, target } => control.is_adjacent(*target),
            CircuitOp::Swap { a, b } => a.is_adjacent(*b),
            _ => true,
        })
    }
}

/// Nearest-neighbour chain `1 – 2 – … – n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LinearTopology {
    pub n_qubits: usize,
}

impl LinearTopology {
    pub fn new(n_qubits: usize) -> Self {
        LinearTopology { n_qubits }
    }

    pub fn links(&self) -> impl Iterator<Item = (QubitIndex, QubitIndex)> {
        (1..self.n_qubits).map(|q| (QubitIndex::new(q), QubitIndex::new(q + 1)))
    }

    pub fn connected(&self, a: QubitIndex, b: QubitIndex) -> bool {
        a.is_adjacent(b) && a.get().max(b.get()) <= self.n_qubits
    }
}

/// Gates that run concurrently on disjoint qubits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slice {
    /// Indices into [`NativeProgram::gates`].
    pub gates: Vec<usize>,
    /// Qubits touched by the slice, ascending.
    pub active: Vec<QubitIndex>,
}

/// Fully lowered program: native gates in order plus their time slices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NativeProgram {
    pub n_qubits: usize,
    pub gates: Vec<NativeGate>,
    pub slices: Vec<Slice>,
    /// `e^{iα}` such that `e^{iα}·(product of gates)` equals the source circuit.
    pub global_phase: f64,
}

impl NativeProgram {
    /// Groups gates into as-soon-as-possible slices: each gate lands in the
    /// first slice after the last one that touches any of its qubits.
    pub fn from_gates(n_qubits: usize, gates: Vec<NativeGate>, global_phase: f64) -> Result<Self> {
        let mut last_slice = vec![0usize; n_qubits + 1];
        let mut slices: Vec<Slice> = Vec::new();
        for (i, g) in gates.iter().enumerate() {
            g.check(n_qubits)?;
            if let NativeGate::Cphase { qubit, .. } = g {
                if qubit.get() + 1 > n_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: qubit.get() + 1,
                        n: n_qubits,
                    });
                }
            }
            let support = g.support();
            let level = support.iter().map(|q| last_slice[q.get()]).max().unwrap_or(0);
            if level == slices.len() {
                slices.push(Slice {
                    gates: Vec::new(),
                    active: Vec::new(),
                });
            }
            let slice = &mut slices[level];
            slice.gates.push(i);
            slice.active.extend(&support);
            slice.active.sort();
            for q in support {
                last_slice[q.get()] = level + 1;
            }
        }
        Ok(NativeProgram {
            n_qubits,
            gates,
            slices,
            global_phase,
        })
    }

    /// Product of the gates in list order, without the global phase.
    pub fn sequential_unitary(&self) -> Result<UnitaryMatrix> {
        let mut u = UnitaryMatrix::identity_qubits(self.n_qubits);
        for g in &self.gates {
            u.apply_local(&g.matrix(), &g.support())?;
        }
        Ok(u)
    }

    /// Product taken slice by slice, without the global phase.
    pub fn sliced_unitary(&self) -> Result<UnitaryMatrix> {
        let mut u = UnitaryMatrix::identity_qubits(self.n_qubits);
        for s in &self.slices {
            for &i in &s.gates {
                let g = &self.gates[i];
                u.apply_local(&g.matrix(), &g.support())?;
            }
        }
        Ok(u)
    }

    /// Gate product including the tracked global phase.
    pub fn unitary(&self) -> Result<UnitaryMatrix> {
        Ok(self.sequential_unitary()?.with_global_phase(self.global_phase))
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g {
                NativeGate::Xrot { .. } => c.x += 1,
                NativeGate::Zrot { .. } => c.z += 1,
                NativeGate::Cphase { .. } => c.cp += 1,
            }
        }
        c.total = self.gates.len();
        c.slices = self.slices.len();
        c
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub x: usize,
    pub z: usize,
    pub cp: usize,
    pub total: usize,
    pub slices: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{hadamard, phase_distance, q};

    #[test]
    fn ops_are_validated() {
        let mut c = CircuitIR::new(3).unwrap();
        assert_eq!(c.cnot(q(1), q(1)).unwrap_err(), Error::ControlEqualsTarget(1));
        assert!(matches!(
            c.cnot(q(1), q(4)).unwrap_err(),
            Error::QubitOutOfRange { .. }
        ));
        assert!(c.single(UnitaryMatrix::identity(4), q(1)).is_err());
        assert!(CircuitIR::new(0).is_err());
        assert!(CircuitIR::new(13).is_err());
    }

    #[test]
    fn slices_have_disjoint_supports() {
        let gates = vec![
            NativeGate::x(1.0, q(1)),
            NativeGate::z(0.5, q(3)),
            NativeGate::cp(0.3, q(1), q(2)).unwrap(),
            NativeGate::x(0.2, q(3)),
        ];
        let p = NativeProgram::from_gates(3, gates, 0.0).unwrap();
        assert_eq!(p.slices.len(), 2);
        assert_eq!(p.slices[0].gates, vec![0, 1]);
        assert_eq!(p.slices[1].gates, vec![2, 3]);
        for s in &p.slices {
            let mut seen = std::collections::BTreeSet::new();
            for &i in &s.gates {
                for q in p.gates[i].support() {
                    assert!(seen.insert(q));
                }
            }
        }
        let a = p.sliced_unitary().unwrap();
        let b = p.sequential_unitary().unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn ideal_unitary_uses_exact_operators() {
        let mut c = CircuitIR::new(2).unwrap();
        c.single(hadamard(), q(1)).unwrap().cnot(q(1), q(2)).unwrap();
        let out = c.apply_ideal(&StateVector::zero(2).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(0).re - r).abs() < 1e-15);
        assert!((out.amplitude(3).re - r).abs() < 1e-15);
        let mut swapped = CircuitIR::new(2).unwrap();
        swapped.swap(q(1), q(2)).unwrap().swap(q(2), q(1)).unwrap();
        let u = swapped.ideal_unitary().unwrap();
        assert!(phase_distance(&u, &UnitaryMatrix::identity(4)).unwrap() < 1e-12);
    }
}
