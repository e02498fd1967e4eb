use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?} (h, w, c), got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("frame data length {got} does not match {height}x{width}x{channels}")]
    DataLength {
        height: usize,
        width: usize,
        channels: usize,
        got: usize,
    },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),
    #[error("pixel {index} has value {value} outside [0, 1]")]
    PixelOutOfRange { index: usize, value: f32 },
    #[error("frame {index} has shape {got:?}, first frame has {expected:?}")]
    FrameShape {
        index: usize,
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("frame {height}x{width} is smaller than the {window}-pixel window")]
    FrameTooSmall {
        height: usize,
        width: usize,
        window: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("crop size {size} exceeds frame {height}x{width}")]
    CropTooLarge {
        size: usize,
        height: usize,
        width: usize,
    },
    #[error("input is {got:?} (h, w, c) but the model expects {expected:?}")]
    ModelInput {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("tensor shape {got:?} does not match layer shape {expected:?}")]
    TensorShape {
        expected: [usize; 5],
        got: [usize; 5],
    },
}
