use thiserror::Error;

use crate::model::JobId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping of [`Error`] variants, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input itself is malformed or violates an instance invariant.
    Validation,
    /// The input is well formed but outside what the requested routine supports.
    Precondition,
    /// A value or a search space does not fit the integer types in use.
    Overflow,
    /// A solver produced something its own checks rejected.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} must be a positive integer, got {value}")]
    NonPositiveValue { what: String, value: i64 },

    #[error("job {job}: expected {expected} processing times, found {found}")]
    ProcLengthMismatch {
        job: JobId,
        expected: usize,
        found: usize,
    },

    #[error("duplicate job id {0}")]
    DuplicateJobId(JobId),

    #[error("unknown job id {0}")]
    UnknownJobId(JobId),

    #[error("job index {0} is out of range")]
    InvalidJobIndex(usize),

    #[error("permutation for M{machine} is not a bijection on the JIT set")]
    PermSetMismatch { machine: usize },

    #[error("{solver} requires {supported} machines, instance has {found}")]
    UnsupportedMachineCount {
        solver: &'static str,
        supported: &'static str,
        found: usize,
    },

    #[error("instance has {jobs} jobs, exhaustive search is capped at {cap}")]
    InstanceTooLarge { jobs: usize, cap: usize },

    #[error("invalid kSUM instance: {0}")]
    InvalidKSum(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonPositiveValue { .. }
            | Error::ProcLengthMismatch { .. }
            | Error::DuplicateJobId(_)
            | Error::UnknownJobId(_)
            | Error::InvalidJobIndex(_)
            | Error::PermSetMismatch { .. }
            | Error::InvalidKSum(_) => ErrorKind::Validation,
            Error::UnsupportedMachineCount { .. }
            | Error::InstanceTooLarge { .. }
            | Error::PreconditionViolated(_) => ErrorKind::Precondition,
            Error::Overflow(_) => ErrorKind::Overflow,
            Error::Internal(_) => ErrorKind::Internal,
        }
    }
}

pub(crate) fn checked_add(a: i64, b: i64, what: &str) -> Result<i64> {
    a.checked_add(b)
        .ok_or_else(|| Error::Overflow(format!("{what}: {a} + {b}")))
}

pub(crate) fn checked_sub(a: i64, b: i64, what: &str) -> Result<i64> {
    a.checked_sub(b)
        .ok_or_else(|| Error::Overflow(format!("{what}: {a} - {b}")))
}

pub(crate) fn checked_mul(a: i64, b: i64, what: &str) -> Result<i64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::Overflow(format!("{what}: {a} * {b}")))
}
