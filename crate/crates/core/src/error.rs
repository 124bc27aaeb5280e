use std::io;

use thiserror::Error;

use crate::verify::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("input of {0} symbols exceeds the supported maximum of {max}", max = crate::text::MAX_LEN)]
    TooLong(usize),

    #[error("alphabet of {0} distinct symbols exceeds the supported maximum of 65535")]
    AlphabetTooLarge(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("oracle refuses n = {n} (limit {limit})")]
    OracleLimit { n: usize, limit: usize },

    #[error("exhaustive enumeration of {sigma}^{n} strings exceeds the 2^24 guard")]
    EnumerationTooLarge { sigma: usize, n: usize },

    #[error("at least {min} Monte Carlo trials are required, got {got}")]
    TooFewTrials { got: u64, min: u64 },

    #[error("invalid dataset spec: {0}")]
    Dataset(String),

    #[error("malformed suffix array file: {0}")]
    Format(String),

    #[error("suffix array check failed: {0}")]
    Verification(Violation),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
