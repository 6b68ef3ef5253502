use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (negative time,
    /// non-positive energy, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The phase shift is identically zero when the coupling vanishes.
    #[error("degenerate coupling: v0 = 0 has no finite arccot branch")]
    DegenerateCoupling,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    /// The sampled series is too coarse for trapezoidal segment averaging.
    #[error("segment {segment} is under-resolved: {reason}")]
    Resolution { segment: usize, reason: String },

    #[error("{what} did not converge after {iterations} iterations: {detail}")]
    Convergence {
        what: &'static str,
        iterations: usize,
        detail: String,
    },

    /// The fitter hit its iteration cap; carries the best parameters seen.
    #[error("fit did not converge after {iterations} iterations (best params {best_params:?}, rms {rms:.3e})")]
    FitNotConverged {
        iterations: usize,
        best_params: Vec<f64>,
        rms: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for numerical non-convergence, 1 for everything
    /// else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } | Error::FitNotConverged { .. } => 2,
            _ => 1,
        }
    }
}
