use thiserror::Error;

use crate::measure::MeasureId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("non-finite value at segment {segment}, sample {sample}, channel {channel}")]
    NonFinite {
        segment: usize,
        sample: usize,
        channel: usize,
    },

    #[error("segment count mismatch: x has {x}, y has {y}")]
    SegmentMismatch { x: usize, y: usize },

    #[error("frequency bin {bin} out of range (0..{n_freqs})")]
    BinOutOfRange { bin: usize, n_freqs: usize },

    #[error("{what} needs at least {needed} segments, got {found}; record more segments")]
    TooFewSegments {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("spectra are not ensemble-mean centered; center them or waive explicitly")]
    NotCentered,

    #[error("{matrix} is numerically singular (reciprocal condition estimate {rcond:e})")]
    Singular { matrix: &'static str, rcond: f64 },

    #[error("{matrix} is not positive semidefinite (pivot {pivot:e} at index {index})")]
    NotPositiveSemidefinite {
        matrix: &'static str,
        index: usize,
        pivot: f64,
    },

    #[error("{what} has zero variance")]
    ZeroVariance { what: &'static str },

    #[error("{measure} evaluated to {value}, outside its range beyond rounding tolerance")]
    NumericalFailure { measure: MeasureId, value: f64 },

    #[error("degenerate coefficient at segment {segment}, bin {bin}{}", channel.map(|c| format!(", channel {c}")).unwrap_or_default())]
    Degenerate {
        segment: usize,
        bin: usize,
        channel: Option<usize>,
    },

    #[error("{measure} requires univariate series (p = q = 1), got p = {p}, q = {q}")]
    NotUnivariate { measure: MeasureId, p: usize, q: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("permutation {index} failed: {source}")]
    PermutationFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal numerical error: {0}")]
    Internal(String),
}
