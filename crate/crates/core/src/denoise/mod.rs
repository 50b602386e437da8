//! Gaussian denoisers used as the prior step of the solver.
//!
//! The strength argument is a noise standard deviation in pixel units.

mod blur;
#[cfg(not(target_arch = "wasm32"))]
mod external;
mod sliding_dct;

use std::str::FromStr;

pub use blur::{gaussian_blur_denoiser, gaussian_kernel, GaussianBlur};
#[cfg(not(target_arch = "wasm32"))]
pub use external::SubprocessDenoiser;
pub use sliding_dct::{dct_threshold_denoiser, DctThreshold, DEFAULT_THRESHOLD_FACTOR};

use crate::codecs::ExternalOptions;
use crate::error::DenoiseError;
use crate::image::ImageBuffer;

pub trait Denoiser: Send + Sync {
    /// Output has the input's dimensions and depends only on the inputs.
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError>;

    fn descriptor(&self) -> String;
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        (**self).denoise(img, sigma)
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
}

impl<D: Denoiser + ?Sized> Denoiser for Box<D> {
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        (**self).denoise(img, sigma)
    }
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
}

pub(crate) fn check_strength(sigma: f64) -> Result<(), DenoiseError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(DenoiseError::InvalidStrength(sigma))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDenoiser;

impl Denoiser for IdentityDenoiser {
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        check_strength(sigma)?;
        Ok(img.clone())
    }

    fn descriptor(&self) -> String {
        "identity".into()
    }
}

/// Denoiser selection as written on the command line:
/// `gauss`, `dct`, `dct:FACTOR`, `identity` or `cmd:TEMPLATE`.
#[derive(Debug, Clone, PartialEq)]
pub enum DenoiserSpec {
    Gauss,
    Dct { factor: f64 },
    Identity,
    Command { template: String },
}

impl DenoiserSpec {
    #[cfg_attr(target_arch = "wasm32", allow(unused_variables))]
    pub fn build(&self, ext: &ExternalOptions) -> Result<Box<dyn Denoiser>, DenoiseError> {
        Ok(match self {
            Self::Gauss => Box::new(GaussianBlur),
            Self::Dct { factor } => Box::new(DctThreshold::new(*factor)?),
            Self::Identity => Box::new(IdentityDenoiser),
            #[cfg(target_arch = "wasm32")]
            Self::Command { .. } => {
                return Err(DenoiseError::External(crate::error::CodecError::InvalidParameter(
                    "external commands are unavailable on this target".into(),
                )))
            }
            #[cfg(not(target_arch = "wasm32"))]
            Self::Command { template } => {
                let mut d = SubprocessDenoiser::new(template.clone())?;
                if let Some(dir) = &ext.workdir {
                    d = d.with_workdir(dir.clone());
                }
                if let Some(t) = ext.timeout {
                    d = d.with_timeout(t);
                }
                Box::new(d)
            }
        })
    }
}

impl std::fmt::Display for DenoiserSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Gauss => write!(f, "gauss"),
            Self::Dct { factor } if *factor == DEFAULT_THRESHOLD_FACTOR => write!(f, "dct"),
            Self::Dct { factor } => write!(f, "dct:{factor}"),
            Self::Identity => write!(f, "identity"),
            Self::Command { template } => write!(f, "cmd:{template}"),
        }
    }
}

impl FromStr for DenoiserSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gauss" => return Ok(Self::Gauss),
            "dct" => {
                return Ok(Self::Dct {
                    factor: DEFAULT_THRESHOLD_FACTOR,
                })
            }
            "identity" => return Ok(Self::Identity),
            _ => {}
        }
        match s.split_once(':') {
            Some(("dct", f)) => f
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(|factor| Self::Dct { factor })
                .ok_or_else(|| format!("dct needs a positive threshold factor, got {f:?}")),
            Some(("cmd", t)) => {
                let template = t.trim_matches('"').to_string();
                if template.is_empty() {
                    return Err("cmd needs a command template".into());
                }
                Ok(Self::Command { template })
            }
            _ => Err(format!("unknown denoiser {s:?}")),
        }
    }
}
