use super::{midriser, Codec};
use crate::error::CodecError;
use crate::image::{BlockShape, ImageBuffer};

/// Transform coding of vertical pixel pairs with a 45° rotation.
///
/// Each 2x1 pair `(top, bottom)` becomes `Uᵀ[top, bottom]` with
/// `U = (1/√2)[[1, -1], [1, 1]]`; both coefficients are mid-riser
/// quantized with the same step and rotated back. When the height is odd
/// the last row is quantized sample by sample with the same step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTransformCodec {
    step: f64,
    offset: f64,
}

impl PairTransformCodec {
    pub fn new(step: f64) -> Result<Self, CodecError> {
        Self::with_offset(step, 0.0)
    }

    pub fn with_offset(step: f64, offset: f64) -> Result<Self, CodecError> {
        if !(step > 0.0 && step.is_finite()) || !offset.is_finite() {
            return Err(CodecError::InvalidParameter(format!(
                "pair codec needs positive step and finite offset (got {step}, {offset})"
            )));
        }
        Ok(Self { step, offset })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Coefficients of one pair.
    #[inline]
    pub fn forward(top: f64, bottom: f64) -> (f64, f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (s * (top + bottom), s * (bottom - top))
    }

    #[inline]
    pub fn inverse(c0: f64, c1: f64) -> (f64, f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (s * (c0 - c1), s * (c0 + c1))
    }

    fn code_pair(&self, top: f64, bottom: f64) -> (f64, f64) {
        let (c0, c1) = Self::forward(top, bottom);
        Self::inverse(
            midriser(c0, self.step, self.offset),
            midriser(c1, self.step, self.offset),
        )
    }
}

impl Codec for PairTransformCodec {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        let (h, w) = x.dims();
        let src = x.samples();
        let mut out = vec![0.0; h * w];
        for r in (0..h - h % 2).step_by(2) {
            for c in 0..w {
                let (t, b) = self.code_pair(src[r * w + c], src[(r + 1) * w + c]);
                out[r * w + c] = t;
                out[(r + 1) * w + c] = b;
            }
        }
        if h % 2 == 1 {
            let r = h - 1;
            for c in 0..w {
                out[r * w + c] = midriser(src[r * w + c], self.step, self.offset);
            }
        }
        Ok(x.with_samples(out)?)
    }

    fn block_structure(&self) -> Option<BlockShape> {
        Some(BlockShape::new(2, 1))
    }

    fn descriptor(&self) -> String {
        format!("pair-rotation(step={}, offset={})", self.step, self.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_step_is_identity() {
        let c = PairTransformCodec::new(1e-9).unwrap();
        let x = ImageBuffer::from_fn(6, 5, |r, col| (r * 31 + col * 7) as f64 % 255.0).unwrap();
        let y = c.apply(&x).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_transform_coder_model() {
        use crate::quantlin::{rotation_45, ScalarQuantizer, TransformCoder};
        let step = 20.0;
        let tc = TransformCoder::new(
            rotation_45(),
            vec![ScalarQuantizer::uniform(step).unwrap(); 2],
        )
        .unwrap();
        let codec = PairTransformCodec::new(step).unwrap();
        let x = ImageBuffer::new(2, 3, vec![10.0, 200.0, 33.3, 90.0, 12.0, 240.0]).unwrap();
        let y = codec.apply(&x).unwrap();
        for c in 0..3 {
            let expect = tc.apply(&[x.get(0, c), x.get(1, c)]).unwrap();
            assert!((y.get(0, c) - expect[0]).abs() < 1e-12);
            assert!((y.get(1, c) - expect[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_height_last_row_is_scalar() {
        let c = PairTransformCodec::new(16.0).unwrap();
        let x = ImageBuffer::filled(3, 2, 100.0).unwrap();
        let y = c.apply(&x).unwrap();
        assert_eq!(y.get(2, 0), 104.0);
        assert_eq!(y.get(2, 1), 104.0);
    }
}
