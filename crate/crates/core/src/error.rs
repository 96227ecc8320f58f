use thiserror::Error;

/// Errors produced by the hitting-probability pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("node {label:?} has no outgoing weight")]
    ZeroRow { label: String },

    #[error("chain is not irreducible: {0}")]
    Irreducible(String),

    #[error("numerical failure: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("simulation exceeded {cap} steps from state {start}")]
    SimulationDivergence { start: usize, cap: u64 },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("tolerance error: {0}; try a smaller degeneracy tolerance")]
    Tolerance(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 2 for input/domain problems, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Domain(_)
            | Error::ZeroRow { .. }
            | Error::Irreducible(_)
            | Error::Usage(_)
            | Error::Generation(_)
            | Error::Io(_) => 2,
            Error::Numerical { .. }
            | Error::Singular(_)
            | Error::SimulationDivergence { .. }
            | Error::Consistency(_)
            | Error::Tolerance(_)
            | Error::Structure(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
