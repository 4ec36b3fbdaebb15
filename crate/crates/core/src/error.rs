use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NonUnitaryInput { deviation: f64 },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(String),

    #[error("postselection impossible: preselection is orthogonal to |0_a>")]
    PostselectionImpossible,

    #[error("postselection intensity i0 = {i0:e} is below the overlap threshold")]
    ZeroPostselectionOverlap { i0: f64 },

    #[error("measurement strength {epsilon} is singular (sin 2ε = 0)")]
    SingularStrength { epsilon: f64 },

    #[error("phase is indeterminate: i2 = i3 and i4 = i5 while |weak value| > 0")]
    IndeterminatePhase,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier written to the `error` column of sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidGate(_) => "InvalidGate",
            Error::InvalidState(_) => "InvalidState",
            Error::NonUnitaryInput { .. } => "NonUnitaryInput",
            Error::InvalidProbabilities(_) => "InvalidProbabilities",
            Error::InvalidNoiseModel(_) => "InvalidNoiseModel",
            Error::PostselectionImpossible => "PostselectionImpossible",
            Error::ZeroPostselectionOverlap { .. } => "ZeroPostselectionOverlap",
            Error::SingularStrength { .. } => "SingularStrength",
            Error::IndeterminatePhase => "IndeterminatePhase",
            Error::LengthMismatch(_) => "LengthMismatch",
            Error::EmptyInput => "EmptyInput",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// True for errors caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}
