//! Emulator for approximate DNN accelerators.
//!
//! Every multiplication in supported layers is executed by a configurable
//! approximate compute unit (ACU), emulated either through an exhaustive
//! lookup table or a behavioral function. The crate covers the full
//! pipeline: model/dataset loading, integer quantization with histogram
//! calibration, LUT generation and error metrics, a threaded gather-friendly
//! GEMM core, approximate layer execution, and approximation-aware
//! retraining with straight-through-estimator gradients.

pub mod acu;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod kernels;
pub mod layers;
pub mod model;
pub mod quant;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
