//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by constructors, extraction, fitting and reporting.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter violates its constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No observations are available (e.g. no value above the threshold).
    #[error("empty sample: {0}")]
    EmptySample(String),

    /// Inconsistent or unusable configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The starting point of a chain has zero posterior density.
    #[error("infeasible initial state: {0}")]
    Infeasible(String),

    /// A quantity is undefined because its inputs carry no spread.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A per-draw transform produced too many non-finite values.
    #[error("{count} of {total} draws gave a non-finite value")]
    NonFinite { count: usize, total: usize },
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::EmptySample(_) => "empty_sample",
            Error::Config(_) => "config",
            Error::Infeasible(_) => "infeasible",
            Error::Degenerate(_) => "degenerate",
            Error::NonFinite { .. } => "non_finite",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
