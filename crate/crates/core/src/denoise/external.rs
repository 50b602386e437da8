use std::path::PathBuf;
use std::time::Duration;

use super::{check_strength, Denoiser};
use crate::codecs::run_pgm_command;
use crate::error::{CodecError, DenoiseError};
use crate::image::ImageBuffer;

/// External denoiser driven through PGM temp files, like
/// [`SubprocessCodec`](crate::codecs::SubprocessCodec), with `{sigma}`
/// expanding to the noise standard deviation.
#[derive(Debug, Clone)]
pub struct SubprocessDenoiser {
    template: String,
    workdir: Option<PathBuf>,
    timeout: Duration,
}

impl SubprocessDenoiser {
    pub fn new(template: impl Into<String>) -> Result<Self, DenoiseError> {
        let template = template.into();
        if !template.contains("{in}") || !template.contains("{out}") {
            return Err(CodecError::InvalidParameter(format!(
                "command template needs {{in}} and {{out}}: {template:?}"
            ))
            .into());
        }
        Ok(Self {
            template,
            workdir: None,
            timeout: Duration::from_secs(60),
        })
    }

    pub fn with_workdir(mut self, dir: PathBuf) -> Self {
        self.workdir = Some(dir);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Denoiser for SubprocessDenoiser {
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        check_strength(sigma)?;
        Ok(run_pgm_command(
            &self.template,
            img,
            &[("sigma", sigma.to_string())],
            self.workdir.as_deref(),
            self.timeout,
        )?)
    }

    fn descriptor(&self) -> String {
        format!("subprocess({})", self.template)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_reaches_the_command() {
        let d = SubprocessDenoiser::new("test {sigma} = 1.25 && cp {in} {out}").unwrap();
        let img = ImageBuffer::from_fn(3, 4, |r, c| (r * 50 + c) as f64).unwrap();
        assert_eq!(d.denoise(&img, 1.25).unwrap(), img);
        assert!(d.denoise(&img, 2.0).is_err());
        assert!(SubprocessDenoiser::new("cp {in} x").is_err());
    }
}
