use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("sequence `{label}` queried at n={n} outside its domain [{start}, {end}]")]
    Domain {
        label: String,
        n: u64,
        start: u64,
        end: u64,
    },

    #[error("sequence `{label}` is not finite at n={n}")]
    NonFinite { label: String, n: u64 },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("numerical consistency check failed at n={n}: identity gives {identity}, direct evaluation gives {direct}")]
    NumericalConsistency { n: u64, identity: f64, direct: f64 },

    #[error("degenerate window [{m}, {n}]: W(N) - W(M) = {span}")]
    DegenerateWindow { m: u64, n: u64, span: f64 },

    #[error("block at a={a} failed verification: difference {found} at offset {offset}, expected {expected}")]
    LemmaViolation {
        a: u64,
        offset: u64,
        expected: i64,
        found: i64,
    },

    #[error("complexity guard: {0}")]
    Complexity(String),

    #[error("cannot parse {field}: {message}")]
    Parse { field: String, message: String },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
