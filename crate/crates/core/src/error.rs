use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {what} at node ({i}, {j})")]
    NonFinite { what: String, i: usize, j: usize },

    #[error("singular coframe at node ({i}, {j}): determinant {det:e}")]
    SingularCoframe { i: usize, j: usize, det: f64 },

    #[error("s = {s} violates the {endpoint} endpoint of the domain of {family}")]
    Domain {
        family: String,
        s: f64,
        endpoint: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("H' <= 0 reached; last valid s = {last_valid_s}")]
    LeftBonnetRegime { last_valid_s: f64 },

    #[error("blow-up at s = {s}: {what}")]
    BlowUp { s: f64, what: String },

    #[error("integration diverged at node ({i}, {j}): {what}")]
    Diverged { i: usize, j: usize, what: String },

    #[error("rotation of {angle:.3} rad in one step at node ({i}, {j}); refine the grid")]
    StepTooLarge { i: usize, j: usize, angle: f64 },

    #[error("profile samples do not align with the grid: {0}")]
    Misaligned(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by bad input (configuration, domain, parameters)
    /// rather than by a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::Domain { .. }
                | Error::InvalidParameter(_)
                | Error::Config(_)
                | Error::Misaligned(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
