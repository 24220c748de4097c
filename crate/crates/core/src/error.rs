use std::path::PathBuf;

/// Errors produced by the measure, cost and checker routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An integral or moment that the check depends on is infinite.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// An infimum was attained on the boundary of the sampled domain while the
    /// function continues beyond it, so the computed value cannot be trusted.
    #[error("infimum attained at grid edge (output x = {x}, argmin y = {y}); widen the input grid")]
    EdgeAttained { x: f64, y: f64 },

    #[error("support diameter {diameter} exceeds the allowed {bound}")]
    DiameterExceeded { diameter: f64, bound: f64 },

    #[error("solver budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("infeasible marginals: {0}")]
    Infeasible(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn divergent(msg: impl Into<String>) -> Self {
        Error::Divergent(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
