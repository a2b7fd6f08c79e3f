use thiserror::Error;

/// Failures surfaced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: invalid argument: {reason}")]
    InvalidArgument { op: &'static str, reason: String },

    #[error("{op}: precondition violated: {reason}")]
    Precondition { op: &'static str, reason: String },

    #[error("{op}: pole at {at}")]
    Pole { op: &'static str, at: String },

    #[error("coefficient table exhausted: prime {prime} exceeds table bound {n_max}")]
    TableExhausted { prime: u64, n_max: u64 },

    #[error("{op}: coefficient source exhausted, N_max >= {required} required")]
    CoefficientsExhausted { op: &'static str, required: u64 },

    #[error("{op}: near-singular value {magnitude:e} at n = {n}")]
    Singularity { op: &'static str, n: u64, magnitude: f64 },

    #[error("{op}: no convergence: {reason}")]
    NoConvergence { op: &'static str, reason: String },

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(op: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument { op, reason: reason.into() }
}

pub(crate) fn precondition(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Precondition { op, reason: reason.into() }
}
