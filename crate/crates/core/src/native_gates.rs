//! The native gate set `{X(θ), Z(φ), CP(γ)}`, its physical durations, and the
//! CNOT / SWAP constructions built from it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR_SI;
use crate::error::{Error, Result};
use crate::qstate::{embed, QubitIndex, UnitaryMatrix, C64, ZERO};

/// `X(θ) = exp(−iσxθ/2)`.
pub fn x_matrix(theta: f64) -> UnitaryMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
    );
    UnitaryMatrix::new(m).expect("X(θ) is unitary")
}

/// `Z(φ) = exp(−iσzφ/2) = diag(e^{−iφ/2}, e^{iφ/2})`.
pub fn z_matrix(phi: f64) -> UnitaryMatrix {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::from_polar(1.0, -phi / 2.0), ZERO, ZERO, C64::from_polar(1.0, phi / 2.0)],
    );
    UnitaryMatrix::new(m).expect("Z(φ) is unitary")
}

/// `CP(γ) = diag(e^{iγ/2}, e^{−iγ/2}, e^{−iγ/2}, e^{iγ/2})`.
pub fn cp_matrix(gamma: f64) -> UnitaryMatrix {
    let even = C64::from_polar(1.0, gamma / 2.0);
    let odd = C64::from_polar(1.0, -gamma / 2.0);
    UnitaryMatrix::from_diagonal(&[even, odd, odd, even]).expect("CP(γ) is unitary")
}

/// One native operation. A `CPhase` acts on the link `(qubit, qubit + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NativeGate {
    Xrot { theta: f64, qubit: QubitIndex },
    Zrot { phi: f64, qubit: QubitIndex },
    Cphase { gamma: f64, qubit: QubitIndex },
}

impl NativeGate {
    pub fn x(theta: f64, qubit: QubitIndex) -> Self {
        NativeGate::Xrot { theta, qubit }
    }

    pub fn z(phi: f64, qubit: QubitIndex) -> Self {
        NativeGate::Zrot { phi, qubit }
    }

    /// CP on an adjacent pair given in either order.
    pub fn cp(gamma: f64, a: QubitIndex, b: QubitIndex) -> Result<Self> {
        if !a.is_adjacent(b) {
            return Err(Error::NonAdjacent(a.get(), b.get()));
        }
        Ok(NativeGate::Cphase {
            gamma,
            qubit: a.min(b),
        })
    }

    pub fn angle(&self) -> f64 {
        match *self {
            NativeGate::Xrot { theta, .. } => theta,
            NativeGate::Zrot { phi, .. } => phi,
            NativeGate::Cphase { gamma, .. } => gamma,
        }
    }

    /// Qubits touched, ascending.
    pub fn support(&self) -> Vec<QubitIndex> {
        match *self {
            NativeGate::Xrot { qubit, .. } | NativeGate::Zrot { qubit, .. } => vec![qubit],
            NativeGate::Cphase { qubit, .. } => vec![qubit, QubitIndex::new(qubit.get() + 1)],
        }
    }

    pub fn matrix(&self) -> UnitaryMatrix {
        match *self {
            NativeGate::Xrot { theta, .. } => x_matrix(theta),
            NativeGate::Zrot { phi, .. } => z_matrix(phi),
            NativeGate::Cphase { gamma, .. } => cp_matrix(gamma),
        }
    }

    pub fn embedded(&self, n: usize) -> Result<UnitaryMatrix> {
        embed(&self.matrix(), &self.support(), n)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if !self.angle().is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite angle in {self}")));
        }
        self.support().iter().try_for_each(|q| q.check(n))
    }

    pub fn name(&self) -> &'static str {
        match self {
            NativeGate::Xrot { .. } => "X",
            NativeGate::Zrot { .. } => "Z",
            NativeGate::Cphase { .. } => "CP",
        }
    }
}

impl fmt::Display for NativeGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.name(), self.support()[0], self.angle())
    }
}

/// Physical constants of a device. Energies share one unit and `hbar` fixes
/// the time unit; the natural default is `ħ = Δ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Tunneling matrix element Δ.
    pub delta: f64,
    /// Josephson energy scale, `E_J = e_j0 · (1 − cos 2φ0)`.
    pub e_j0: f64,
    /// Equilibrium phase φ0 in `(0, π/2]`.
    pub phi0: f64,
    /// Refocusing bias amplitude δE.
    pub delta_e: f64,
    /// Refocusing half-period τ.
    pub tau: f64,
    pub hbar: f64,
    /// Bias used for deliberate Z gates; defaults to `delta_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_e_z: Option<f64>,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            delta: 1.0,
            e_j0: 1.0,
            phi0: PI / 4.0,
            delta_e: 10.0,
            tau: 0.01,
            hbar: 1.0,
            delta_e_z: None,
        }
    }
}

/// Non-fatal parameter conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ParamWarning {
    /// δE does not exceed the tunneling width (proxied by Δ).
    WeakRefocusing { delta_e: f64, delta: f64 },
    /// Josephson coupling is not small next to the refocusing bias.
    StrongCoupling { e_j: f64, delta_e: f64 },
    /// τ is not much shorter than the tunneling time `πħ/Δ`.
    SlowRefocusing { tau: f64, tunneling_time: f64 },
    /// τ is not below the bath correlation time.
    SlowerThanBath { tau: f64, tau_c: f64 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::WeakRefocusing { delta_e, delta } => {
                write!(f, "refocusing amplitude {delta_e:e} does not exceed tunneling {delta:e}")
            }
            ParamWarning::StrongCoupling { e_j, delta_e } => {
                write!(f, "E_J = {e_j:e} exceeds 0.1·δE = {:e}", 0.1 * delta_e)
            }
            ParamWarning::SlowRefocusing { tau, tunneling_time } => {
                write!(f, "tau = {tau:e} is not much shorter than the tunneling time {tunneling_time:e}")
            }
            ParamWarning::SlowerThanBath { tau, tau_c } => {
                write!(f, "tau = {tau:e} exceeds the bath correlation time {tau_c:e}")
            }
        }
    }
}

impl DeviceParams {
    /// SI preset: Δ calibrated so a full beat X(2π) takes 10 ns, τ = 0.1 ps,
    /// δE = 10Δ, and E_J = Δ at φ0 = π/4.
    pub fn si() -> Self {
        let delta = HBAR_SI * PI / 1e-8;
        DeviceParams {
            delta,
            e_j0: delta,
            phi0: PI / 4.0,
            delta_e: 10.0 * delta,
            tau: 1e-13,
            hbar: HBAR_SI,
            delta_e_z: None,
        }
    }

    /// Rejects negative, zero or non-finite values. Δ may be zero, which
    /// models a qubit with tunneling fully blocked.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("e_j0", self.e_j0),
            ("phi0", self.phi0),
            ("delta_e", self.delta_e),
            ("tau", self.tau),
            ("hbar", self.hbar),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        if self.phi0 > FRAC_PI_2 {
            return Err(Error::InvalidParameter(format!(
                "phi0 must lie in (0, π/2], got {}",
                self.phi0
            )));
        }
        if let Some(z) = self.delta_e_z {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::InvalidParameter(format!("delta_e_z must be positive, got {z}")));
            }
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        let mut w = Vec::new();
        if self.delta_e <= self.delta {
            w.push(ParamWarning::WeakRefocusing {
                delta_e: self.delta_e,
                delta: self.delta,
            });
        }
        let e_j = self.josephson_energy();
        if e_j > 0.1 * self.delta_e {
            w.push(ParamWarning::StrongCoupling {
                e_j,
                delta_e: self.delta_e,
            });
        }
        if self.delta > 0.0 {
            let tunneling_time = PI * self.hbar / self.delta;
            if self.tau > 0.1 * tunneling_time {
                w.push(ParamWarning::SlowRefocusing {
                    tau: self.tau,
                    tunneling_time,
                });
            }
        }
        w
    }

    pub fn josephson_energy(&self) -> f64 {
        josephson_energy(self)
    }

    /// Bias applied for deliberate Z rotations.
    pub fn z_drive_bias(&self) -> f64 {
        self.delta_e_z.unwrap_or(self.delta_e)
    }

    /// One full refocusing period `2τ`.
    pub fn refocusing_period(&self) -> f64 {
        2.0 * self.tau
    }
}

/// `E_J = e_j0 · (1 − cos 2φ0)`.
pub fn josephson_energy(p: &DeviceParams) -> f64 {
    p.e_j0 * (1.0 - (2.0 * p.phi0).cos())
}

/// Angles in `[0, 2π]` are kept; anything else is reduced modulo 2π. The
/// reduced gate differs from the requested one by at most a global sign.
pub fn normalize_angle(angle: f64) -> f64 {
    if (0.0..=TAU).contains(&angle) {
        angle
    } else {
        angle.rem_euclid(TAU)
    }
}

/// Time the hardware needs to realize `g`:
/// X from free beats (`θ = 2tΔ/ħ`), CP from the open parity key (`γ = E_J t/ħ`),
/// Z from the Z-drive bias (`φ = δE_z t/ħ`).
pub fn gate_duration(g: &NativeGate, p: &DeviceParams) -> Result<f64> {
    let angle = normalize_angle(g.angle());
    match g {
        NativeGate::Xrot { .. } => {
            if p.delta == 0.0 {
                return Err(Error::ZeroEnergy("tunneling amplitude Δ"));
            }
            Ok(angle * p.hbar / (2.0 * p.delta))
        }
        NativeGate::Cphase { .. } => {
            let e_j = josephson_energy(p);
            if e_j == 0.0 {
                return Err(Error::ZeroEnergy("Josephson energy E_J"));
            }
            Ok(angle * p.hbar / e_j)
        }
        NativeGate::Zrot { .. } => Ok(angle * p.hbar / p.z_drive_bias()),
    }
}

/// Native gates in temporal order plus the global phase `e^{iα}` that turns
/// their product into the target operator exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateSequence {
    pub gates: Vec<NativeGate>,
    pub global_phase: f64,
}

impl GateSequence {
    /// `e^{iα} · G_k ⋯ G_1` on an `n`-qubit register.
    pub fn unitary(&self, n: usize) -> Result<UnitaryMatrix> {
        let mut u = UnitaryMatrix::identity_qubits(n);
        for g in &self.gates {
            u.apply_local(&g.matrix(), &g.support())?;
        }
        Ok(u.with_global_phase(self.global_phase))
    }
}

/// Global phase of the CNOT construction.
pub const CNOT_PHASE: f64 = 5.0 * PI / 4.0;

/// CNOT from three X(π/2), four Z(π/2) and one CP(π/2), earliest first:
/// `X_t Z_t X_t · CP · Z_c Z_t · X_t Z_t X_t`. With the `e^{i5π/4}` prefactor the
/// product is exactly CNOT.
pub fn cnot_sequence(control: QubitIndex, target: QubitIndex) -> Result<GateSequence> {
    if control == target {
        return Err(Error::ControlEqualsTarget(control.get()));
    }
    if !control.is_adjacent(target) {
        return Err(Error::NonAdjacent(control.get(), target.get()));
    }
    let h = FRAC_PI_2;
    let gates = vec![
        NativeGate::x(h, target),
        NativeGate::z(h, target),
        NativeGate::x(h, target),
        NativeGate::cp(h, control, target)?,
        NativeGate::z(h, control),
        NativeGate::z(h, target),
        NativeGate::x(h, target),
        NativeGate::z(h, target),
        NativeGate::x(h, target),
    ];
    Ok(GateSequence {
        gates,
        global_phase: CNOT_PHASE,
    })
}

/// SWAP as `CN_ab · CN_ba · CN_ab`.
pub fn swap_sequence(a: QubitIndex, b: QubitIndex) -> Result<GateSequence> {
    let mut gates = Vec::with_capacity(27);
    let mut phase = 0.0;
    for (c, t) in [(a, b), (b, a), (a, b)] {
        let s = cnot_sequence(c, t)?;
        gates.extend(s.gates);
        phase += s.global_phase;
    }
    Ok(GateSequence {
        gates,
        global_phase: phase.rem_euclid(TAU),
    })
}
