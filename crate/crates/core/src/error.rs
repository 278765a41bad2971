use thiserror::Error;

/// Errors produced by the analytic and Monte Carlo routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// Adaptive quadrature ran out of its interval budget before reaching tolerance.
    #[error("quadrature did not converge: error estimate {estimate:e} > tolerance {tolerance:e} after {intervals} intervals")]
    NonConvergence {
        estimate: f64,
        tolerance: f64,
        intervals: usize,
    },

    /// A configuration value failed validation.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain { name, value, domain }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
