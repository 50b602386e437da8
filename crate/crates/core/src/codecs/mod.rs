//! Compression-decompression operators `y = C(x)`.
//!
//! A [`Codec`] is treated as a black box by the Jacobian estimator and the
//! solver. Codecs that process blocks independently advertise the block
//! shape, which lets the estimator perturb every block in one call.

mod dct;
mod pair;
mod scalar;
#[cfg(not(target_arch = "wasm32"))]
mod subprocess;
mod testing;

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

pub use dct::{BlockDctCodec, JPEG_LUMA_TABLE};
pub use pair::PairTransformCodec;
pub use scalar::ScalarQuantCodec;
#[cfg(not(target_arch = "wasm32"))]
pub use subprocess::{run_pgm_command, SubprocessCodec, TEMP_DIR_ENV};
pub use testing::{CountingCodec, IdentityCodec, LinearCodec};

use crate::error::CodecError;
use crate::image::{BlockShape, ImageBuffer};

pub trait Codec: Send + Sync {
    /// Deterministic compression followed by decompression; output has the
    /// input's dimensions.
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError>;

    /// Shape of independently coded blocks, when the codec has one.
    fn block_structure(&self) -> Option<BlockShape> {
        None
    }

    fn descriptor(&self) -> String;
}

impl<C: Codec + ?Sized> Codec for &C {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        (**self).apply(x)
    }
    fn block_structure(&self) -> Option<BlockShape> {
        (**self).block_structure()
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
}

impl<C: Codec + ?Sized> Codec for Box<C> {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        (**self).apply(x)
    }
    fn block_structure(&self) -> Option<BlockShape> {
        (**self).block_structure()
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
}

impl<C: Codec + ?Sized> Codec for Arc<C> {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        (**self).apply(x)
    }
    fn block_structure(&self) -> Option<BlockShape> {
        (**self).block_structure()
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
}

/// Mid-riser reconstruction `(floor((v - offset)/Δ) + 1/2)·Δ + offset`.
#[inline]
pub fn midriser(v: f64, step: f64, offset: f64) -> f64 {
    (((v - offset) / step).floor() + 0.5) * step + offset
}

fn check_rate(r: f64) -> Result<(), CodecError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(CodecError::InvalidParameter(format!(
            "bit-rate must be positive (got {r})"
        )));
    }
    Ok(())
}

/// Step covering `[0, 256)` with `2^r` uniform cells.
pub fn scalar_step_for_rate(r: f64) -> Result<f64, CodecError> {
    check_rate(r)?;
    Ok(256.0 / 2f64.powf(r))
}

/// Inverse of the effective rate `r̃ = 16 - log₂Δ` of the pair codec.
pub fn pair_step_for_rate(r_eff: f64) -> Result<f64, CodecError> {
    check_rate(r_eff)?;
    Ok(2f64.powf(16.0 - r_eff))
}

pub fn pair_effective_rate(step: f64) -> f64 {
    16.0 - step.log2()
}

/// Codec selection as written on the command line:
/// `scalar:STEP`, `pair:STEP`, `dct:SCALE`, `cmd:TEMPLATE` or `identity`.
#[derive(Debug, Clone, PartialEq)]
pub enum CodecSpec {
    Scalar { step: f64 },
    Pair { step: f64 },
    Dct { scale: f64 },
    Command { template: String },
    Identity,
}

/// Runtime settings for external codecs.
#[derive(Debug, Clone, Default)]
pub struct ExternalOptions {
    pub workdir: Option<PathBuf>,
    pub timeout: Option<Duration>,
}

impl CodecSpec {
    #[cfg_attr(target_arch = "wasm32", allow(unused_variables))]
    pub fn build(&self, ext: &ExternalOptions) -> Result<Box<dyn Codec>, CodecError> {
        Ok(match self {
            Self::Scalar { step } => Box::new(ScalarQuantCodec::new(*step)?),
            Self::Pair { step } => Box::new(PairTransformCodec::new(*step)?),
            Self::Dct { scale } => Box::new(BlockDctCodec::jpeg_like(*scale)?),
            #[cfg(target_arch = "wasm32")]
            Self::Command { .. } => {
                return Err(CodecError::InvalidParameter(
                    "external commands are unavailable on this target".into(),
                ))
            }
            #[cfg(not(target_arch = "wasm32"))]
            Self::Command { template } => {
                let mut c = SubprocessCodec::new(template.clone())?;
                if let Some(dir) = &ext.workdir {
                    c = c.with_workdir(dir.clone());
                }
                if let Some(t) = ext.timeout {
                    c = c.with_timeout(t);
                }
                Box::new(c)
            }
            Self::Identity => Box::new(IdentityCodec),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Scalar { .. } => "scalar",
            Self::Pair { .. } => "pair",
            Self::Dct { .. } => "dct",
            Self::Command { .. } => "cmd",
            Self::Identity => "identity",
        }
    }
}

impl std::fmt::Display for CodecSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Scalar { step } => write!(f, "scalar:{step}"),
            Self::Pair { step } => write!(f, "pair:{step}"),
            Self::Dct { scale } => write!(f, "dct:{scale}"),
            Self::Command { template } => write!(f, "cmd:{template}"),
            Self::Identity => write!(f, "identity"),
        }
    }
}

impl FromStr for CodecSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "identity" {
            return Ok(Self::Identity);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected KIND:ARG, got {s:?}"))?;
        let number = || {
            arg.parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .ok_or_else(|| format!("{kind} needs a positive number, got {arg:?}"))
        };
        match kind {
            "scalar" => Ok(Self::Scalar { step: number()? }),
            "pair" => Ok(Self::Pair { step: number()? }),
            "dct" => Ok(Self::Dct { scale: number()? }),
            "cmd" => {
                let template = arg.trim_matches('"').to_string();
                if template.is_empty() {
                    return Err("cmd needs a command template".into());
                }
                Ok(Self::Command { template })
            }
            other => Err(format!("unknown codec kind {other:?}")),
        }
    }
}
