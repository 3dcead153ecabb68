//! Pulse-level simulation and native-gate compilation for qubits built from
//! clean Josephson junctions between d-wave superconductors.
//!
//! The native gate set is `{X(θ), Z(φ), CP(γ)}`: X rotations come from free
//! tunneling beats between the degenerate `±φ0` phase states, Z rotations from
//! a bias that lifts the degeneracy, and CP from opening a parity key between
//! neighbouring qubits. Passive qubits are kept idle with a global refocusing
//! drive that alternates the bias between `+δE` and `−δE` every `τ`.
//!
//! Basis ordering everywhere is `|q1 q2 … qn⟩` with qubit 1 the most
//! significant bit, and qubits are numbered from 1.

pub mod compiler;
pub mod constants;
pub mod error;
pub mod native_gates;
pub mod noise_lab;
pub mod pulse_engine;
pub mod qstate;

pub use error::{Error, Result};
pub use native_gates::{DeviceParams, NativeGate};
pub use qstate::{QubitIndex, StateVector, UnitaryMatrix, C64};

/// Version string embedded in every serialized artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
