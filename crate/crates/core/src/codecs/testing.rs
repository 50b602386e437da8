use std::sync::atomic::{AtomicUsize, Ordering};

use super::Codec;
use crate::error::{CodecError, ShapeError};
use crate::image::{BlockShape, ImageBuffer};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityCodec;

impl Codec for IdentityCodec {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        Ok(x.clone())
    }

    fn block_structure(&self) -> Option<BlockShape> {
        Some(BlockShape::new(1, 1))
    }

    fn descriptor(&self) -> String {
        "identity".into()
    }
}

/// `C(x) = M·x` on the row-major sample vector.
#[derive(Debug, Clone)]
pub struct LinearCodec {
    matrix: DenseMatrix,
    blocks: Option<BlockShape>,
}

impl LinearCodec {
    pub fn new(matrix: DenseMatrix) -> Result<Self, ShapeError> {
        if matrix.rows() != matrix.cols() {
            return Err(ShapeError::Mismatch {
                left: (matrix.rows(), matrix.cols()),
                right: (matrix.cols(), matrix.cols()),
            });
        }
        Ok(Self {
            matrix,
            blocks: None,
        })
    }

    /// Declares a block structure. The caller vouches that `M` respects it.
    pub fn with_blocks(mut self, shape: BlockShape) -> Self {
        self.blocks = Some(shape);
        self
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl Codec for LinearCodec {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        Ok(x.with_samples(self.matrix.mul_vec(x.samples())?)?)
    }

    fn block_structure(&self) -> Option<BlockShape> {
        self.blocks
    }

    fn descriptor(&self) -> String {
        format!("linear({}x{})", self.matrix.rows(), self.matrix.cols())
    }
}

/// Wraps a codec and counts `apply` calls.
#[derive(Debug)]
pub struct CountingCodec<C> {
    inner: C,
    calls: AtomicUsize,
}

impl<C: Codec> CountingCodec<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }
}

impl<C: Codec> Codec for CountingCodec<C> {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.apply(x)
    }

    fn block_structure(&self) -> Option<BlockShape> {
        self.inner.block_structure()
    }

    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }
}
