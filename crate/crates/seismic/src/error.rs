use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeismicError {
    #[error("unknown miniSEED encoding code {0}")]
    UnknownEncoding(u8),
    #[error("unsupported miniSEED word order {0} (only big-endian records are handled)")]
    UnsupportedWordOrder(u8),
    #[error("truncated miniSEED record at offset {offset}: need {need} bytes, have {have}")]
    Truncated {
        offset: usize,
        need: usize,
        have: usize,
    },
    #[error("corrupt record at offset {offset}: {reason}")]
    CorruptRecord { offset: usize, reason: String },
    #[error("record at offset {offset} declares {declared} samples but {decoded} decoded")]
    SampleCountMismatch {
        offset: usize,
        declared: usize,
        decoded: usize,
    },
    #[error("channel {id}: records overlap by {samples} samples at {at}")]
    Overlap {
        id: String,
        samples: usize,
        at: String,
    },
    #[error("channel {id}: gap of {samples} samples at {at} exceeds the bridgeable limit of {limit}")]
    Gap {
        id: String,
        samples: usize,
        at: String,
        limit: usize,
    },
    #[error("sample rates differ across channels: {0:?}")]
    RateMismatch(Vec<f64>),
    #[error("channel windows do not overlap")]
    NoOverlap,
    #[error("counts input requires a sensitivity constant")]
    MissingSensitivity,
    #[error("unsupported resample target {0} Hz (supported: 40, 90, 240 from a 40 Hz source)")]
    UnsupportedRate(f64),
    #[error("expected {expected} channels, got {got}")]
    ChannelCount { expected: usize, got: usize },
    #[error("no data for query (HTTP 204)")]
    NoData,
    #[error("server returned HTTP {0}")]
    HttpStatus(u16),
    #[error("request failed after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("invalid query: {0}")]
    BadQuery(String),
    #[error("{context}: {reason}")]
    Format { context: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SeismicError {
    pub fn format(context: impl Into<String>, reason: impl Into<String>) -> Self {
        SeismicError::Format {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
