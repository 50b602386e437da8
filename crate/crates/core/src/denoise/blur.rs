use super::{check_strength, Denoiser};
use crate::error::DenoiseError;
use crate::image::ImageBuffer;

const STD_PER_SIGMA: f64 = 0.5;
const MIN_STD: f64 = 0.3;
const MAX_STD: f64 = 5.0;

/// Normalized Gaussian taps for noise level `sigma`: kernel standard
/// deviation `0.5·sigma` clamped to `[0.3, 5]`, radius `ceil(3·std)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let std = (STD_PER_SIGMA * sigma).clamp(MIN_STD, MAX_STD);
    let radius = (3.0 * std).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * std * std)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Half-sample symmetric extension: `..., x1, x0 | x0, x1, ...`.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Separable Gaussian smoothing with symmetric boundary extension.
pub fn gaussian_blur_denoiser(img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
    check_strength(sigma)?;
    let k = gaussian_kernel(sigma);
    let radius = (k.len() / 2) as isize;
    let (h, w) = img.dims();
    let src = img.samples();
    let mut tmp = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            tmp[r * w + c] = k
                .iter()
                .enumerate()
                .map(|(j, t)| t * src[r * w + reflect(c as isize + j as isize - radius, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            out[r * w + c] = k
                .iter()
                .enumerate()
                .map(|(i, t)| t * tmp[reflect(r as isize + i as isize - radius, h) * w + c])
                .sum();
        }
    }
    Ok(img.with_samples(out)?)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianBlur;

impl Denoiser for GaussianBlur {
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        gaussian_blur_denoiser(img, sigma)
    }

    fn descriptor(&self) -> String {
        "gauss".into()
    }
}
