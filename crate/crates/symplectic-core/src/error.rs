use thiserror::Error;

/// Errors shared by every layer of the workspace.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum RppError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NonUnitary { residual: f64 },

    #[error("singular action: column {column} lost rank{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    SingularAction { column: usize, step: Option<u64> },

    #[error("internal band edge: channel l={l} has |mu|={mu_abs:.9} (parabolic)")]
    InternalBandEdge { l: usize, mu_abs: f64 },

    #[error("degenerate spin-orbit block{}: {detail}", frequency.map(|f| format!(" at frequency index {f}")).unwrap_or_default())]
    DegenerateBlock {
        frequency: Option<usize>,
        detail: String,
    },

    #[error("{} of {total} realizations failed (indices {failed:?}); first error: {first}", failed.len())]
    ChainFailure {
        failed: Vec<usize>,
        total: usize,
        first: Box<RppError>,
    },
}

pub type Result<T> = std::result::Result<T, RppError>;

impl RppError {
    pub fn dims(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        RppError::DimensionMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors caused by the physics (band edges, degenerate
    /// blocks, numerical rank loss) rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            RppError::InternalBandEdge { .. }
            | RppError::DegenerateBlock { .. }
            | RppError::SingularAction { .. }
            | RppError::NonUnitary { .. }
            | RppError::InvariantViolation(_) => true,
            RppError::ChainFailure { first, .. } => first.is_numerical(),
            _ => false,
        }
    }
}
