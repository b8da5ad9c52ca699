use thiserror::Error;

use crate::model::ValidationReport;
use crate::saddle::ThetaAdmissibility;
use crate::value_iteration::ValueApproxResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed game file at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("model failed validation:\n{0}")]
    Invalid(ValidationReport),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("matrix game solver failed at state {state:?}: {reason}")]
    SolverFailure {
        state: Option<usize>,
        reason: String,
        matrix: Vec<Vec<f64>>,
    },

    #[error("model is not irreducible (gamma = {gamma:e})")]
    Reducible { gamma: f64 },

    #[error(
        "theta = {} is outside the admissible range (0, {}); no saddle-point guarantee",
        .0.theta,
        .0.theta_max
    )]
    InadmissibleTheta(ThetaAdmissibility),

    #[error("value iteration did not reach the requested accuracy after {} outer steps", .0.n_outer)]
    NonConvergence(Box<ValueApproxResult>),

    #[error("power iteration did not converge: {0}")]
    PowerIteration(String),

    #[error("brute-force enumeration refused: {0}")]
    GuardExceeded(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::Parse { .. } | Error::Schema(_) | Error::Invalid(_) => 2,
            Error::Input(_)
            | Error::Reducible { .. }
            | Error::InadmissibleTheta(_)
            | Error::GuardExceeded(_) => 3,
            Error::NonConvergence(_) | Error::SolverFailure { .. } | Error::PowerIteration(_) => 4,
        }
    }
}
