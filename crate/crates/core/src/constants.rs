//! Numerical tolerances shared by every module.

/// Tolerance record. All comparisons in the crate read from [`TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unitarity and general algebraic checks.
    pub algebraic: f64,
    /// Identities that hold exactly up to rounding.
    pub exact: f64,
    /// Unitarity slack for user-supplied matrices in circuit files.
    pub user_unitarity: f64,
    /// Below this, `sin(θ/2)` or `cos(θ/2)` counts as zero in Euler decomposition.
    pub euler_degenerate: f64,
    /// Relative slack when quantizing times onto the refocusing grid.
    pub time_grid: f64,
}

pub const TOL: Tolerances = Tolerances {
    algebraic: 1e-10,
    exact: 1e-12,
    user_unitarity: 1e-6,
    euler_degenerate: 1e-12,
    time_grid: 1e-9,
};

/// Largest register handled by the dense backend.
pub const MAX_QUBITS: usize = 12;

/// Largest register accepted for pulse-level simulation.
pub const MAX_PULSE_QUBITS: usize = 6;

/// Reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
