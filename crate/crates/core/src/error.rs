use thiserror::Error;

/// Errors raised anywhere in the geometry engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("undeclared identifier `{0}`")]
    Undeclared(String),

    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: String },

    #[error("degenerate {what} at {location:?} (|det| = {det:e})")]
    Degenerate {
        what: &'static str,
        location: Vec<f64>,
        det: f64,
    },

    #[error("point {0:?} lies outside the chart domain")]
    OutsideDomain(Vec<f64>),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("curve left the chart domain at t = {time}")]
    ExitedDomain { time: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("immersion is not Lagrangian (residual {0:e})")]
    NotLagrangian(f64),

    #[error("manifold definition: {0}")]
    Definition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Errors that come from the geometry itself rather than bad input.
    pub fn is_geometric(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Degenerate { .. }
                | Error::OutsideDomain(_)
                | Error::ExitedDomain { .. }
                | Error::NotLagrangian(_)
        )
    }
}
