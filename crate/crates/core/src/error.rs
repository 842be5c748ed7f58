use thiserror::Error;

/// Errors raised by construction, coding and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {name} = {value} outside its domain {domain}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("alphabet bound mu must be at least 2, got {0}")]
    InvalidMu(usize),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{what} = {value} out of range 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("exhaustive enumeration needs {needed} joint outputs, limit is {limit}")]
    EnumerationTooLarge { needed: u128, limit: u128 },

    #[error("channel mass drifted by {0:e} from 1")]
    NormalizationDrift(f64),

    #[error("invalid channel table: {0}")]
    InvalidChannel(String),

    #[error("received symbol {0} does not belong to the channel alphabet")]
    SymbolOutsideAlphabet(String),

    #[error("pruned encoder requires the first {leading_zeros} source bits to be zero; bit {position} is set")]
    PruningViolation { leading_zeros: usize, position: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
