use super::{midriser, Codec};
use crate::error::CodecError;
use crate::image::{BlockShape, ImageBuffer};

/// Independent mid-riser quantization of every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarQuantCodec {
    step: f64,
    offset: f64,
}

impl ScalarQuantCodec {
    pub fn new(step: f64) -> Result<Self, CodecError> {
        Self::with_offset(step, 0.0)
    }

    pub fn with_offset(step: f64, offset: f64) -> Result<Self, CodecError> {
        if !(step > 0.0 && step.is_finite()) || !offset.is_finite() {
            return Err(CodecError::InvalidParameter(format!(
                "scalar codec needs positive step and finite offset (got {step}, {offset})"
            )));
        }
        Ok(Self { step, offset })
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Codec for ScalarQuantCodec {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        Ok(x.map(|v| midriser(v, self.step, self.offset))?)
    }

    fn block_structure(&self) -> Option<BlockShape> {
        Some(BlockShape::new(1, 1))
    }

    fn descriptor(&self) -> String {
        format!("scalar(step={}, offset={})", self.step, self.offset)
    }
}
