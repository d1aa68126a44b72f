use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    /// A scenario or parameter set fails validation. `path` names the field.
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("failed to parse {origin}: {message}")]
    Parse { origin: String, message: String },

    /// No control sequence satisfies the constraints from the initial state.
    #[error("problem is infeasible: {reason}")]
    Infeasible {
        reason: String,
        /// Distance (m) of the first boundary, scanning backward from the
        /// destination, at which every state is infeasible.
        dead_boundary: Option<f64>,
    },

    /// Replay of a solution disagreed with the solver; indicates a bug.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("simulation did not terminate: {0}")]
    NonTermination(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
