//! Error type shared by every module.

use crate::words::Word;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("restriction to {n} bits of a word of length {len}")]
    OutOfRange { n: usize, len: usize },

    #[error("invalid bit value {0} (bits are 0 or 1)")]
    InvalidBit(u8),

    #[error("enumeration budget of {limit} words exceeded")]
    Budget { limit: u64 },

    #[error("fuel of {fuel} exhausted")]
    Fuel { fuel: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("declared flag `{flag}` violated at {witness}")]
    FlagViolation { flag: &'static str, witness: Word },

    #[error("inconsistent input at node {node}: {reason}")]
    Inconsistent { node: Word, reason: String },

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("oracle error: {0}")]
    Oracle(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn certificate(msg: impl Into<String>) -> Self {
        Error::Certificate(msg.into())
    }

    pub(crate) fn inconsistent(node: &Word, reason: impl Into<String>) -> Self {
        Error::Inconsistent { node: node.clone(), reason: reason.into() }
    }

    /// True for errors caused by running out of enumeration budget or fuel.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::Fuel { .. })
    }
}
