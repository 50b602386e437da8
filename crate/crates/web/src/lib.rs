//! Browser bindings: quantizer fit surfaces, transform-coder filter
//! responses and a restoration demo on an embedded test image.

use pnpcomp::codecs::{pair_step_for_rate, scalar_step_for_rate, PairTransformCodec, ScalarQuantCodec};
use pnpcomp::denoise::DctThreshold;
use pnpcomp::io::decode_pgm;
use pnpcomp::quantlin::{
    dct_basis, fit_scalar, geometric_steps, ApproxArea, GridRange, Interval, ScalarQuantizer,
    TransformCoder,
};
use pnpcomp::{preset, psnr, Codec, CodecKind, ImageBuffer};
use wasm_bindgen::prelude::*;

static TEST_IMAGE: &[u8] = include_bytes!("../www/camera96.pgm");

fn quantizer(kind: &str, step: f64) -> Result<ScalarQuantizer, String> {
    match kind {
        "two-level" => Ok(ScalarQuantizer::TwoLevel),
        "uniform" => ScalarQuantizer::uniform(step).map_err(|e| e.to_string()),
        other => Err(format!("unknown quantizer {other:?}")),
    }
}

fn range(start: f64, step: f64, stop: f64) -> Result<Vec<f64>, String> {
    Ok(GridRange::new(start, step, stop)?.values())
}

/// Optimal fit on a `(x0, δ)` grid, rows indexed by `δ`.
///
/// Returns `[rows, cols, values...]` with `x0` varying fastest; `which` selects
/// `a`, `b` or `lmse`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn quantizer_surface(
    kind: &str,
    step: f64,
    which: &str,
    x0_start: f64,
    x0_step: f64,
    x0_stop: f64,
    delta_start: f64,
    delta_step: f64,
    delta_stop: f64,
) -> Result<Vec<f64>, String> {
    let q = quantizer(kind, step)?;
    let xs = range(x0_start, x0_step, x0_stop)?;
    let ds = range(delta_start, delta_step, delta_stop)?;
    let mut out = vec![ds.len() as f64, xs.len() as f64];
    for &d in &ds {
        for &x in &xs {
            let f = fit_scalar(&q, Interval::new(x, d).map_err(|e| e.to_string())?);
            out.push(match which {
                "a" => f.a,
                "b" => f.b,
                "lmse" => f.lmse,
                other => return Err(format!("unknown quantity {other:?}")),
            });
        }
    }
    Ok(out)
}

/// Per-coefficient pass gains of an `n`-point DCT coder at a constant
/// signal `level`, for each `δ` in the range. Returns `[rows, n, gains...]`.
#[wasm_bindgen]
pub fn dct_filter_response(
    n: usize,
    quantizers: &str,
    step: f64,
    level: f64,
    delta_start: f64,
    delta_step: f64,
    delta_stop: f64,
) -> Result<Vec<f64>, String> {
    if n == 0 || n > 64 {
        return Err("transform size must be in 1..=64".into());
    }
    let qs = match quantizers {
        "geometric" => geometric_steps(n),
        kind => vec![quantizer(kind, step)?; n],
    };
    let tc = TransformCoder::new(dct_basis(n), qs).map_err(|e| e.to_string())?;
    let x0 = vec![level; n];
    let ds = range(delta_start, delta_step, delta_stop)?;
    let mut out = vec![ds.len() as f64, n as f64];
    for d in ds {
        out.extend(tc.filter_response(&x0, d).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Outcome of [`restore_demo`]; images are RGBA for a canvas.
#[wasm_bindgen]
pub struct DemoResult {
    width: usize,
    height: usize,
    original: Vec<u8>,
    compressed: Vec<u8>,
    restored: Vec<u8>,
    psnr_compressed: f64,
    psnr_restored: f64,
    iterations: usize,
}

#[wasm_bindgen]
impl DemoResult {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }
    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn original(&self) -> Vec<u8> {
        self.original.clone()
    }
    pub fn compressed(&self) -> Vec<u8> {
        self.compressed.clone()
    }
    pub fn restored(&self) -> Vec<u8> {
        self.restored.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn psnr_compressed(&self) -> f64 {
        self.psnr_compressed
    }
    #[wasm_bindgen(getter)]
    pub fn psnr_restored(&self) -> f64 {
        self.psnr_restored
    }
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

fn rgba(img: &ImageBuffer) -> Vec<u8> {
    img.to_u8().into_iter().flat_map(|v| [v, v, v, 255]).collect()
}

/// Compresses the embedded image with `codec` (`scalar` or `pair`) at
/// `rate` and restores it with the preset parameters.
#[wasm_bindgen]
pub fn restore_demo(codec: &str, rate: f64, rotated: bool) -> Result<DemoResult, String> {
    let x = decode_pgm(TEST_IMAGE).map_err(|e| e.to_string())?;
    let kind: CodecKind = codec.parse()?;
    let area = if rotated { ApproxArea::Rotated } else { ApproxArea::Aligned };
    let mut cfg = preset(kind, rate, area).map_err(|e| e.to_string())?.config;
    let c: Box<dyn Codec> = match kind {
        CodecKind::Scalar => {
            Box::new(ScalarQuantCodec::new(scalar_step_for_rate(rate).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?)
        }
        CodecKind::Pair => {
            let step = pair_step_for_rate(rate).map_err(|e| e.to_string())?;
            if rotated {
                cfg.linearization = pnpcomp::Linearization::PairRotated { step };
            }
            Box::new(PairTransformCodec::new(step).map_err(|e| e.to_string())?)
        }
        CodecKind::Dct => return Err("the demo supports scalar and pair codecs".into()),
    };
    let y = c.apply(&x).map_err(|e| e.to_string())?.clamp(0.0, 255.0);
    let (restored, state) =
        pnpcomp::run(c.as_ref(), &y, &DctThreshold::default(), &cfg).map_err(|e| e.to_string())?;
    Ok(DemoResult {
        width: x.width(),
        height: x.height(),
        psnr_compressed: psnr(&x, &y).map_err(|e| e.to_string())?,
        psnr_restored: psnr(&x, &restored).map_err(|e| e.to_string())?,
        iterations: state.iteration,
        original: rgba(&x),
        compressed: rgba(&y),
        restored: rgba(&restored),
    })
}
