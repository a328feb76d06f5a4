use thiserror::Error;

/// Errors raised by the lattice, region, flow and analytic layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: non-finite coordinates, degenerate or non-unimodular bases.
    #[error("invalid input: {0}")]
    Input(String),
    /// A documented precondition of the operation does not hold.
    #[error("domain error: {0}")]
    Domain(String),
    /// Enumeration or allocation would exceed a configured budget.
    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    Resource { what: &'static str, requested: f64, cap: f64 },
    /// Operation intentionally not supported for this combination of inputs.
    #[error("not implemented: {0}")]
    NotImplemented(String),
    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
