use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data (non-monotone grid, mismatched lengths, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// The request is well formed but outside what the representation supports.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Parameters violate a feasibility condition of the model.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("steady-state solver did not converge after {steps} steps (residual {residual:.3e}, w_max {w_max})")]
    Convergence {
        steps: usize,
        residual: f64,
        w_max: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
