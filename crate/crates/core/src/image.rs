//! Grayscale sample grids and their partition into rectangular blocks.
//!
//! Images are stored row-major. Blocks are vectorized column-major: the
//! sample at local `(r, c)` of a block with height `h` sits at index
//! `c * h + r`. Every module that moves data between an image and a block
//! vector goes through [`BlockGrid`] so that convention lives in one place.

use crate::error::ShapeError;

/// Real-valued 2D sample grid, nominally in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    samples: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, samples: Vec<f64>) -> Result<Self, ShapeError> {
        if height == 0 || width == 0 {
            return Err(ShapeError::EmptyDimensions { height, width });
        }
        if samples.len() != height * width {
            return Err(ShapeError::Length {
                expected: height * width,
                actual: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(ShapeError::NonFinite(i));
        }
        Ok(Self {
            height,
            width,
            samples,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self, ShapeError> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ShapeError> {
        let mut samples = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                samples.push(f(r, c));
            }
        }
        Self::new(height, width, samples)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    /// Same dimensions, new samples; the samples are validated.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self, ShapeError> {
        Self::new(self.height, self.width, samples)
    }

    /// Applies `f` to every sample. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, ShapeError> {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise combination of two images of equal dimensions.
    pub fn zip_map(
        &self,
        other: &ImageBuffer,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, ShapeError> {
        self.check_same_dims(other)?;
        self.with_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn check_same_dims(&self, other: &ImageBuffer) -> Result<(), ShapeError> {
        if self.dims() != other.dims() {
            return Err(ShapeError::Mismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            samples: self.samples.iter().map(|v| v.clamp(lo, hi)).collect(),
        }
    }

    /// Rounds to the nearest 8-bit level after clamping to `[0, 255]`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.samples
            .iter()
            .map(|v| v.clamp(0.0, 255.0).round() as u8)
            .collect()
    }

    pub fn from_u8(height: usize, width: usize, data: &[u8]) -> Result<Self, ShapeError> {
        Self::new(height, width, data.iter().map(|&b| f64::from(b)).collect())
    }
}

/// Nominal block dimensions `B_H x B_W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockShape {
    pub height: usize,
    pub width: usize,
}

impl BlockShape {
    pub const fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub const fn area(&self) -> usize {
        self.height * self.width
    }
}

impl std::str::FromStr for BlockShape {
    type Err = String;

    /// Parses `HxW`, e.g. `8x8`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|n| *n > 0);
        s.split_once(['x', 'X'])
            .and_then(|(h, w)| Some(Self::new(parse(h)?, parse(w)?)))
            .ok_or_else(|| format!("expected block shape HxW, got {s:?}"))
    }
}

impl std::fmt::Display for BlockShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// One tile of a [`BlockGrid`], with its true (possibly clipped) size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

impl Block {
    pub const fn len(&self) -> usize {
        self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Image coordinates of local position `p` (column-major within the block).
    #[inline]
    pub fn pixel(&self, p: usize) -> (usize, usize) {
        (self.row + p % self.height, self.col + p / self.height)
    }
}

/// Non-overlapping tiling of an image, enumerated row-major by block origin.
/// Trailing blocks along the bottom and right edges may be smaller than
/// the nominal shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGrid {
    image_height: usize,
    image_width: usize,
    shape: BlockShape,
    blocks: Vec<Block>,
    blocks_per_row: usize,
}

impl BlockGrid {
    pub fn new(
        image_height: usize,
        image_width: usize,
        shape: BlockShape,
    ) -> Result<Self, ShapeError> {
        if image_height == 0 || image_width == 0 {
            return Err(ShapeError::EmptyDimensions {
                height: image_height,
                width: image_width,
            });
        }
        if shape.height == 0 || shape.width == 0 {
            return Err(ShapeError::EmptyDimensions {
                height: shape.height,
                width: shape.width,
            });
        }
        let mut blocks = Vec::new();
        for row in (0..image_height).step_by(shape.height) {
            for col in (0..image_width).step_by(shape.width) {
                blocks.push(Block {
                    row,
                    col,
                    height: shape.height.min(image_height - row),
                    width: shape.width.min(image_width - col),
                });
            }
        }
        Ok(Self {
            image_height,
            image_width,
            shape,
            blocks,
            blocks_per_row: image_width.div_ceil(shape.width),
        })
    }

    pub fn for_image(img: &ImageBuffer, shape: BlockShape) -> Result<Self, ShapeError> {
        Self::new(img.height(), img.width(), shape)
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.image_height, self.image_width)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, index: usize) -> Result<&Block, ShapeError> {
        self.blocks.get(index).ok_or(ShapeError::BlockIndex {
            index,
            count: self.blocks.len(),
        })
    }

    /// Block index and local (column-major) position of image pixel `(row, col)`.
    pub fn locate(&self, row: usize, col: usize) -> (usize, usize) {
        let bi = (row / self.shape.height) * self.blocks_per_row + col / self.shape.width;
        let b = &self.blocks[bi];
        (bi, (col - b.col) * b.height + (row - b.row))
    }

    fn check_image(&self, img: &ImageBuffer) -> Result<(), ShapeError> {
        if img.dims() != self.image_dims() {
            return Err(ShapeError::Mismatch {
                left: img.dims(),
                right: self.image_dims(),
            });
        }
        Ok(())
    }

    /// Copies block `index` of a raw row-major sample slice into `out`.
    pub(crate) fn gather(&self, samples: &[f64], index: usize, out: &mut Vec<f64>) {
        let b = &self.blocks[index];
        out.clear();
        for c in b.col..b.col + b.width {
            for r in b.row..b.row + b.height {
                out.push(samples[r * self.image_width + c]);
            }
        }
    }

    /// Writes a column-major block vector into a raw row-major sample slice.
    pub(crate) fn scatter(&self, samples: &mut [f64], index: usize, data: &[f64]) {
        let b = &self.blocks[index];
        let mut it = data.iter();
        for c in b.col..b.col + b.width {
            for r in b.row..b.row + b.height {
                samples[r * self.image_width + c] = *it.next().expect("block length checked");
            }
        }
    }

    pub fn extract_block(&self, img: &ImageBuffer, index: usize) -> Result<Vec<f64>, ShapeError> {
        self.check_image(img)?;
        self.block(index)?;
        let mut out = Vec::new();
        self.gather(img.samples(), index, &mut out);
        Ok(out)
    }

    pub fn insert_block(
        &self,
        img: &ImageBuffer,
        index: usize,
        data: &[f64],
    ) -> Result<ImageBuffer, ShapeError> {
        self.check_image(img)?;
        let b = self.block(index)?;
        if data.len() != b.len() {
            return Err(ShapeError::Length {
                expected: b.len(),
                actual: data.len(),
            });
        }
        let mut samples = img.samples().to_vec();
        self.scatter(&mut samples, index, data);
        ImageBuffer::new(self.image_height, self.image_width, samples)
    }
}

/// Free-function form of [`BlockGrid::extract_block`].
pub fn extract_block(
    img: &ImageBuffer,
    grid: &BlockGrid,
    index: usize,
) -> Result<Vec<f64>, ShapeError> {
    grid.extract_block(img, index)
}

/// Free-function form of [`BlockGrid::insert_block`].
pub fn insert_block(
    img: &ImageBuffer,
    grid: &BlockGrid,
    index: usize,
    data: &[f64],
) -> Result<ImageBuffer, ShapeError> {
    grid.insert_block(img, index, data)
}
