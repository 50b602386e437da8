use super::Codec;
use crate::dct::Dct2;
use crate::error::CodecError;
use crate::image::{BlockGrid, BlockShape, ImageBuffer};

/// Luminance quantization table from the JPEG specification, row-major.
pub const JPEG_LUMA_TABLE: [f64; 64] = [
    16., 11., 10., 16., 24., 40., 51., 61., //
    12., 12., 14., 19., 26., 58., 60., 55., //
    14., 13., 16., 24., 40., 57., 69., 56., //
    14., 17., 22., 29., 51., 87., 80., 62., //
    18., 22., 37., 56., 68., 109., 103., 77., //
    24., 35., 55., 64., 81., 104., 113., 92., //
    49., 64., 78., 87., 103., 121., 120., 101., //
    72., 92., 95., 98., 112., 100., 103., 99., //
];

/// JPEG-like 8x8 block DCT codec: no entropy coding, no bitstream.
///
/// Each block is transformed with the orthonormal 2D DCT-II, every
/// coefficient is divided by `scale · table[k]`, rounded to the nearest
/// integer and scaled back before the inverse transform. Partial edge
/// blocks use a DCT of their own size and the top-left part of the table.
#[derive(Debug, Clone)]
pub struct BlockDctCodec {
    table: [f64; 64],
    scale: f64,
}

const SIDE: usize = 8;

impl BlockDctCodec {
    pub fn new(table: [f64; 64], scale: f64) -> Result<Self, CodecError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CodecError::InvalidParameter(format!(
                "dct scale must be positive (got {scale})"
            )));
        }
        if table.iter().any(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(CodecError::InvalidParameter(
                "quantization table entries must be positive".into(),
            ));
        }
        Ok(Self { table, scale })
    }

    pub fn jpeg_like(scale: f64) -> Result<Self, CodecError> {
        Self::new(JPEG_LUMA_TABLE, scale)
    }

    /// Same step for every coefficient.
    pub fn flat(step: f64) -> Result<Self, CodecError> {
        Self::new([1.0; 64], step)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn table(&self) -> &[f64; 64] {
        &self.table
    }

    /// `scale × median(table)`, a rough effective step size.
    pub fn effective_step(&self) -> f64 {
        let mut sorted = self.table;
        sorted.sort_by(f64::total_cmp);
        self.scale * 0.5 * (sorted[31] + sorted[32])
    }
}

impl Codec for BlockDctCodec {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        let grid = BlockGrid::for_image(x, BlockShape::new(SIDE, SIDE))?;
        let (_, w) = x.dims();
        let src = x.samples();
        let mut out = vec![0.0; src.len()];
        let full = Dct2::new(SIDE, SIDE);
        let mut partial: Option<Dct2> = None;
        let mut block = Vec::with_capacity(64);
        let mut coeffs = vec![0.0; 64];
        let mut rec = vec![0.0; 64];
        for b in grid.blocks() {
            let t = if b.height == SIDE && b.width == SIDE {
                &full
            } else {
                if partial
                    .as_ref()
                    .is_none_or(|p| (p.height(), p.width()) != (b.height, b.width))
                {
                    partial = Some(Dct2::new(b.height, b.width));
                }
                partial.as_ref().expect("just built")
            };
            let n = b.height * b.width;
            block.clear();
            for r in b.row..b.row + b.height {
                block.extend_from_slice(&src[r * w + b.col..r * w + b.col + b.width]);
            }
            t.forward(&block, &mut coeffs[..n]);
            for r in 0..b.height {
                for c in 0..b.width {
                    let q = self.scale * self.table[r * SIDE + c];
                    let k = &mut coeffs[r * b.width + c];
                    *k = (*k / q).round() * q;
                }
            }
            t.inverse(&coeffs[..n], &mut rec[..n]);
            for r in 0..b.height {
                out[(b.row + r) * w + b.col..(b.row + r) * w + b.col + b.width]
                    .copy_from_slice(&rec[r * b.width..(r + 1) * b.width]);
            }
        }
        Ok(x.with_samples(out)?)
    }

    fn block_structure(&self) -> Option<BlockShape> {
        Some(BlockShape::new(SIDE, SIDE))
    }

    fn descriptor(&self) -> String {
        format!("block-dct8x8(scale={})", self.scale)
    }
}
