// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} grid points, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate bandwidth: every pairwise distance is zero")]
    DegenerateBandwidth,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("index {index} out of range {lo}..={hi}")]
    OutOfRange { index: usize, lo: usize, hi: usize },

    #[error("budget infeasible: {0}")]
    BudgetInfeasible(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("distance undefined for an empty set")]
    EmptySet,
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for errors caused by the caller's parameters rather than the data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Argument(_)
                | Error::OutOfRange { .. }
                | Error::BudgetInfeasible(_)
                | Error::Unknown { .. }
        )
    }
}
