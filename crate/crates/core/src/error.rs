use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("matrix data has {found} entries, expected {expected}")]
    DataLength { expected: usize, found: usize },
    #[error("rows have unequal lengths")]
    RaggedRows,
    #[error("non-finite value")]
    NonFinite,
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("singular-value cutoff {0} must lie in (0, 1)")]
    InvalidTolerance(f64),
    #[error("regressors have rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("{phase} data does not excite {factors}")]
    Unexcited {
        phase: &'static str,
        factors: String,
    },
    #[error("{phase} phase needs at least {needed} samples, found {found}")]
    NotEnoughSamples {
        phase: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("sample {index} is not in the {expected} phase")]
    WrongPhase {
        index: usize,
        expected: &'static str,
    },
    #[error("sample {index} has no ground-truth {what}")]
    MissingGroundTruth { index: usize, what: &'static str },
    #[error("indentation-only sample {index} carries shear force")]
    ShearInIndentationPhase { index: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("expected {expected} channels, found {found}")]
    ChannelCount { expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
    #[error("dead channel PD{channel}: baseline mean {mean} is not positive")]
    DeadChannel { channel: usize, mean: f64 },
    #[error("baseline needs {needed} frames, found {found}")]
    NotEnoughFrames { needed: usize, found: usize },
    #[error("baseline window must be at least 1")]
    InvalidWindow,
    #[error("raw reading on PD{channel} is negative or non-finite")]
    InvalidReading { channel: usize },
}

impl Error {
    /// True for errors meaning the data does not determine every factor.
    pub fn is_identifiability(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::Unexcited { .. } | Error::NotEnoughSamples { .. }
        )
    }
}
