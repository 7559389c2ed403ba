use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant falls into one of three classes reported by
/// [`Error::class`]: invalid input, an exceeded enumeration cap, or a
/// violated internal invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target sets must share a common size (constraint {index} has {found}, expected {expected})")]
    NonUniformTargets {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("enumeration of {size} items exceeds the cap of {cap}")]
    EnumerationTooLarge { size: f64, cap: u64 },

    #[error("dual code is trivial")]
    NoDualCodeword,

    #[error("degree budget {l} needs {needed} < d_perp but d_perp = {distance}")]
    MinDistanceViolated {
        l: usize,
        distance: usize,
        needed: usize,
    },

    #[error("decoding failure")]
    DecodingFailure,

    #[error("decoder is not injective on the supported error set")]
    DecoderAmbiguity,

    #[error("matrix has rank {rank} < {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("dominance fails at g = {g}, x = {x}: dqi {r_dqi} vs prange {r_prange}")]
    Dominated {
        g: f64,
        x: f64,
        r_dqi: f64,
        r_prange: f64,
    },

    #[error("operators do not commute: {0} and {1}")]
    NonCommuting(usize, usize),

    #[error("{what}: measured {measured:e} exceeds tolerance {tolerance:e}")]
    ToleranceExceeded {
        what: String,
        measured: f64,
        tolerance: f64,
    },

    #[error("consistency check failed: {0}")]
    Inconsistent(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    CapExceeded,
    InvariantViolation,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::EnumerationTooLarge { .. } => ErrorClass::CapExceeded,
            Error::MinDistanceViolated { .. }
            | Error::DecoderAmbiguity
            | Error::NoConvergence { .. }
            | Error::Dominated { .. }
            | Error::ToleranceExceeded { .. }
            | Error::Inconsistent(_) => ErrorClass::InvariantViolation,
            _ => ErrorClass::Input,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with [`Error::EnumerationTooLarge`] when `size` exceeds `cap`.
pub(crate) fn check_cap(size: f64, cap: u64) -> Result<()> {
    if size > cap as f64 {
        Err(Error::EnumerationTooLarge { size, cap })
    } else {
        Ok(())
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
