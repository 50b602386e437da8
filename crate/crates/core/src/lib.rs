//! Compression-artifact reduction by Plug-and-Play ADMM over a linearized
//! codec.
//!
//! The codec is treated as a black box `C`. Each iteration replaces `C`
//! with its first-order model around the current estimate (Jacobian from
//! averaged central differences, block diagonal for block codecs), solves
//! a regularized least-squares problem against the compressed image, and
//! hands the result to a Gaussian denoiser acting as the prior.
//!
//! The [`quantlin`] module holds the analysis of optimal linear
//! approximations of scalar quantizers and transform coders that motivates
//! the finite-difference linearization.

pub mod codecs;
pub mod dct;
pub mod denoise;
pub mod error;
pub mod image;
pub mod io;
pub mod jacobian;
pub mod matrix;
pub mod metrics;
pub mod preset;
pub mod quantlin;
pub mod solver;

pub use codecs::{Codec, CodecSpec};
pub use denoise::{Denoiser, DenoiserSpec};
pub use error::{CodecError, DenoiseError, FormatError, JacobianError, MetricError, ShapeError};
pub use image::{Block, BlockGrid, BlockShape, ImageBuffer};
pub use jacobian::{LinearizedCodec, StepSet};
pub use matrix::DenseMatrix;
pub use metrics::{psnr, ssim, QualityReport};
pub use preset::{preset, CodecKind};
pub use solver::{run, run_observed, Linearization, OutputIterate, RunError, SolverConfig, SolverState};
