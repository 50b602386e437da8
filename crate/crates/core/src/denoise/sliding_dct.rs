use rayon::prelude::*;

use super::{check_strength, Denoiser};
use crate::dct::Dct2;
use crate::error::DenoiseError;
use crate::image::ImageBuffer;

pub const DEFAULT_THRESHOLD_FACTOR: f64 = 2.7;

const PATCH: usize = 8;

/// Hard thresholding of overlapping DCT patches.
///
/// Every 8x8 window (stride 1) is transformed, AC coefficients with
/// magnitude below `factor·sigma` are zeroed, and the reconstructed
/// windows are averaged with equal weights. Images smaller than 8 pixels
/// in a direction use windows of the image's size in that direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DctThreshold {
    factor: f64,
}

impl DctThreshold {
    pub fn new(factor: f64) -> Result<Self, DenoiseError> {
        check_strength(factor)?;
        Ok(Self { factor })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn apply(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        check_strength(sigma)?;
        let threshold = self.factor * sigma;
        let (h, w) = img.dims();
        let (ph, pw) = (PATCH.min(h), PATCH.min(w));
        let t = Dct2::new(ph, pw);
        let src = img.samples();

        // each window row contributes to `ph` image rows; rows are reduced
        // in order afterwards so the sum does not depend on scheduling
        let partials: Vec<Vec<f64>> = (0..=h - ph)
            .into_par_iter()
            .map(|r0| {
                let mut acc = vec![0.0; ph * w];
                let mut patch = vec![0.0; ph * pw];
                let mut coeffs = vec![0.0; ph * pw];
                let mut rec = vec![0.0; ph * pw];
                for c0 in 0..=w - pw {
                    for r in 0..ph {
                        patch[r * pw..(r + 1) * pw]
                            .copy_from_slice(&src[(r0 + r) * w + c0..(r0 + r) * w + c0 + pw]);
                    }
                    t.forward(&patch, &mut coeffs);
                    for k in coeffs.iter_mut().skip(1) {
                        if k.abs() < threshold {
                            *k = 0.0;
                        }
                    }
                    t.inverse(&coeffs, &mut rec);
                    for r in 0..ph {
                        for c in 0..pw {
                            acc[r * w + c0 + c] += rec[r * pw + c];
                        }
                    }
                }
                acc
            })
            .collect();

        let mut sum = vec![0.0; h * w];
        for (r0, acc) in partials.iter().enumerate() {
            for (s, a) in sum[r0 * w..(r0 + ph) * w].iter_mut().zip(acc) {
                *s += a;
            }
        }
        let coverage = |i: usize, n: usize, p: usize| -> f64 {
            let lo = i.saturating_sub(p - 1);
            let hi = i.min(n - p);
            (hi - lo + 1) as f64
        };
        let out = sum
            .iter()
            .enumerate()
            .map(|(i, s)| s / (coverage(i / w, h, ph) * coverage(i % w, w, pw)))
            .collect();
        Ok(img.with_samples(out)?)
    }
}

impl Default for DctThreshold {
    fn default() -> Self {
        Self {
            factor: DEFAULT_THRESHOLD_FACTOR,
        }
    }
}

impl Denoiser for DctThreshold {
    fn denoise(&self, img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
        self.apply(img, sigma)
    }

    fn descriptor(&self) -> String {
        format!("dct-threshold(factor={})", self.factor)
    }
}

/// [`DctThreshold`] with the default factor 2.7.
pub fn dct_threshold_denoiser(img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer, DenoiseError> {
    DctThreshold::default().apply(img, sigma)
}
