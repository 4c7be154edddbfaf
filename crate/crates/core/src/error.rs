use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("truncation radius mismatch: {left} vs {right}")]
    RadiusMismatch { left: usize, right: usize },
    #[error("field must be mean-zero (coefficient at k=0 is {0:e})")]
    NotMeanZero(f64),
    #[error("insufficient tail: only {usable} usable dyadic shells (need 3)")]
    InsufficientTail { usable: usize },
    #[error("blow-up detected after t = {last_good_time}")]
    BlowUp { last_good_time: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resonant terms are only defined when 1/alpha is an integer")]
    NonResonantMode,
    #[error("resonant Duhamel integral needs sample stride <= {max_stride} (got {stride}); store denser samples")]
    SparseResonantSamples { stride: f64, max_stride: f64 },
    #[error("fit failed: {0}")]
    FitFailed(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
