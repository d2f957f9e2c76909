use thiserror::Error;

/// Errors raised by model evaluation, discretization and time stepping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative input {value} passed to {what}")]
    NegativeInput { what: &'static str, value: f64 },

    #[error("motility evaluated to non-positive value {value} at v = {at}")]
    NonPositiveMotility { at: f64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("grid mismatch: expected {expected} cells, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("tridiagonal system is singular (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("{field} became negative ({value:e}) at cell {cell}")]
    NegativityBreach {
        field: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("{field} became non-finite at cell {cell}")]
    NonFinite { field: &'static str, cell: usize },

    #[error("pattern conditions need exponential motility, got {0}")]
    WrongFamily(&'static str),

    #[error("step {step} at t = {time}: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
