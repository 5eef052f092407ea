use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unsupported frame rate {0} fps, expected 40, 90, or 240")]
    UnsupportedFps(u32),

    #[error("solver needs at least 4 iterations, got {0}")]
    TooFewIterations(u32),

    #[error("drive sample rate {drive} Hz does not match simulation rate {fps} fps")]
    DriveRateMismatch { drive: f64, fps: u32 },

    #[error("drive holds {len} samples but the run needs {needed}")]
    DriveTooShort { needed: usize, len: usize },

    #[error("anchor {anchor_id} references missing piece {piece_id}")]
    DanglingAnchor { anchor_id: usize, piece_id: u64 },

    #[error("bond {index} references missing piece {piece_id}")]
    DanglingBond { index: usize, piece_id: u64 },

    #[error("duplicate piece id {0} across building collections")]
    DuplicatePiece(u64),

    #[error("state diverged (non-finite value) at frame {frame}")]
    Diverged { frame: u32 },

    #[error("frame log is empty")]
    EmptyLog,

    #[error("malformed frame log: {0}")]
    BadLog(String),

    #[error("frame log i/o: {0}")]
    Io(#[from] std::io::Error),
}
