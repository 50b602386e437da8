//! Full-reference quality metrics.

use crate::error::MetricError;
use crate::image::ImageBuffer;

const PEAK: f64 = 255.0;
const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// `10·log10(255² / MSE)`, `+∞` for identical images.
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64, MetricError> {
    reference.check_same_dims(test)?;
    let sse: f64 = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mse = sse / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let mid = (WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - mid;
        *v = (-d * d / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.map(|v| v / total)
}

/// Separable weighted sum over every fully contained window.
fn filter_valid(data: &[f64], h: usize, w: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..WINDOW).map(|j| k[j] * data[r * w + c + j]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..WINDOW).map(|i| k[i] * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean structural similarity over all 11x11 Gaussian-weighted windows
/// (σ = 1.5) lying fully inside the image, with `K1 = 0.01`, `K2 = 0.03`
/// and dynamic range 255.
pub fn ssim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64, MetricError> {
    reference.check_same_dims(test)?;
    let (h, w) = reference.dims();
    if h < WINDOW || w < WINDOW {
        return Err(MetricError::TooSmall {
            height: h,
            width: w,
        });
    }
    let k = gaussian_window();
    let x = reference.samples();
    let y = test.samples();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, h, w, &k);
    let mu_y = filter_valid(y, h, w, &k);
    let e_xx = filter_valid(&xx, h, w, &k);
    let e_yy = filter_valid(&yy, h, w, &k);
    let e_xy = filter_valid(&xy, h, w, &k);

    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = e_xx[i] - mx * mx;
            let vy = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr: f64,
    pub ssim: f64,
}

impl QualityReport {
    pub fn compute(reference: &ImageBuffer, test: &ImageBuffer) -> Result<Self, MetricError> {
        Ok(Self {
            psnr: psnr(reference, test)?,
            ssim: ssim(reference, test)?,
        })
    }
}

impl std::fmt::Display for QualityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "psnr={} ssim={}", self.psnr, self.ssim)
    }
}
