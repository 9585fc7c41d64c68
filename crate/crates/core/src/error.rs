use thiserror::Error;

/// Failures while decoding a binary PGM.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("bad magic number: expected `P5`, found {0:?}")]
    BadMagic(String),
    #[error("missing or malformed {field} field in header")]
    BadHeaderField { field: &'static str },
    #[error("zero {field} is not a valid image dimension")]
    ZeroDimension { field: &'static str },
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("truncated raster: expected {expected} bytes, found {found}")]
    TruncatedRaster { expected: usize, found: usize },
}

/// A numeric argument outside its valid range.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter `{name}`: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: String,
}

impl ParamError {
    pub(crate) fn new(name: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            reason: reason.into(),
        }
    }
}

/// The streaming scheduler reached a state it cannot make progress from,
/// or a unit asked for data that was never produced.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schedule violation at cycle {cycle} on {resource}: {detail}")]
pub struct ScheduleError {
    pub cycle: u64,
    pub resource: String,
    pub detail: String,
}
