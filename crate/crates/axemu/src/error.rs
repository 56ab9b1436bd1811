//! Crate-wide error type.

/// Errors produced anywhere in the emulation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file contents (bad magic, truncation, inconsistent header).
    #[error("format error: {0}")]
    Format(String),

    /// A manifest references a tensor that the weight blob does not contain.
    #[error("missing tensor '{0}'")]
    MissingTensor(String),

    #[error("unknown layer kind '{0}'")]
    UnknownLayerKind(String),

    /// Shape-chain validation failure, reported with the offending layer index.
    #[error("shape mismatch at layer {layer}: {msg}")]
    ShapeChain { layer: usize, msg: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Bad run configuration (unknown layer override, incompatible bitwidths, ...).
    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Calibration preconditions not met (empty calibrator, uncalibrated model).
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Loss became non-finite during retraining.
    #[error("training diverged at step {step}: loss is not finite")]
    Diverged { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
