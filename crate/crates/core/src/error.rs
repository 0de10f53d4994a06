use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("no-jump generator is singular: the model has a dark subspace")]
    DarkSubspace,

    #[error("kernel has dimension {kernel_dim}, expected a unique steady state")]
    Degenerate { kernel_dim: usize },

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("the map is not diagonalizable (eigenvector condition number {condition:.3e})")]
    NotDiagonalizable { condition: f64 },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("irrational parameter in exact mode: {0}")]
    IrrationalParameter(String),

    #[error("enumeration of {requested} tuples exceeds the cap of {cap}; sample instead")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("conditioning on a history of zero probability")]
    ZeroProbabilityHistory,

    #[error("every jump weight vanished: the state is dark")]
    DarkState,

    #[error("insufficient data: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} deviates by {deviation:.3e}")]
    Inconsistency { what: String, deviation: f64 },

    #[error("positivity violated: minimum eigenvalue {worst:.3e}")]
    PositivityViolation { worst: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numeric and degeneracy failures, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::DarkSubspace
                | Error::Degenerate { .. }
                | Error::NonConvergence(_)
                | Error::NotDiagonalizable { .. }
                | Error::ZeroProbabilityHistory
                | Error::DarkState
                | Error::Inconsistency { .. }
                | Error::PositivityViolation { .. }
        )
    }
}
