use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("qubits {0} and {1} are not adjacent on the chain")]
    NonAdjacent(usize, usize),

    #[error("control equals target ({0})")]
    ControlEqualsTarget(usize),

    #[error("matrix is not unitary (max |U†U − I| = {0:.3e})")]
    NotUnitary(f64),

    #[error("{n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is zero; the gate cannot be driven")]
    ZeroEnergy(&'static str),

    #[error(
        "gate {gate} lasts {duration:.4e}, shorter than one refocusing period {period:.4e}; \
         use tau <= {suggested_tau:.4e}"
    )]
    GateTooShort {
        gate: String,
        duration: f64,
        period: f64,
        suggested_tau: f64,
    },

    #[error("inconsistent schedule: {0}")]
    InconsistentSchedule(String),

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("number of trajectories must be positive")]
    NoTrajectories,

    #[error("serialization failed: {0}")]
    Serialization(String),
}

impl Error {
    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::QubitOutOfRange { .. } => "qubit_out_of_range",
            Error::DuplicateTarget(_) => "duplicate_target",
            Error::NonAdjacent(..) => "non_adjacent",
            Error::ControlEqualsTarget(_) => "control_equals_target",
            Error::NotUnitary(_) => "not_unitary",
            Error::TooManyQubits { .. } => "too_many_qubits",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ZeroEnergy(_) => "zero_energy",
            Error::GateTooShort { .. } => "gate_too_short",
            Error::InconsistentSchedule(_) => "inconsistent_schedule",
            Error::Parse { .. } => "parse",
            Error::NoTrajectories => "no_trajectories",
            Error::Serialization(_) => "serialization",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
