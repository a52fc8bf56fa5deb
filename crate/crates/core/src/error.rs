use thiserror::Error;

use crate::synth::CfrState;

/// Errors produced by the multiband toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Radar equation evaluated at zero range.
    #[error("singular radar equation: {0}")]
    Singularity(String),

    #[error("CFR of subband {subband} is {found:?}, expected {expected:?}")]
    StateMismatch {
        subband: usize,
        expected: CfrState,
        found: CfrState,
    },

    /// Phase requested for a zero-valued sample.
    #[error("undefined phase at range {0} m (zero sample)")]
    UndefinedPhase(f64),

    #[error("undefined metric: {0}")]
    Undefined(String),

    #[error("undefined PSLR: {0}")]
    UndefinedPslr(String),

    /// No SPBP candidate subset satisfies the configured constraints.
    #[error("no candidate subset: {0}")]
    NoCandidate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
