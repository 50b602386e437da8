//! Finite-difference linearization of a black-box codec.
//!
//! Column `k` of the Jacobian is the average over a set of step lengths of
//! central differences `(C(z + δe_k) - C(z - δe_k)) / 2δ`. When the codec
//! works on independent blocks the Jacobian is block diagonal, and the
//! pixel at the same local position in every block can be perturbed in a
//! single codec call. A full estimate then costs `2·|S|·B_H·B_W` calls no
//! matter how large the image is.

use rayon::prelude::*;

use crate::codecs::Codec;
use crate::error::{JacobianError, ShapeError};
use crate::image::{BlockGrid, BlockShape, ImageBuffer};
use crate::matrix::DenseMatrix;

/// Step lengths for the central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSet {
    deltas: Vec<f64>,
}

impl StepSet {
    pub fn new(deltas: Vec<f64>) -> Result<Self, JacobianError> {
        let valid = !deltas.is_empty()
            && deltas.iter().all(|d| *d > 0.0 && d.is_finite())
            && deltas
                .iter()
                .enumerate()
                .all(|(i, d)| !deltas[..i].contains(d));
        if !valid {
            return Err(JacobianError::InvalidSteps);
        }
        Ok(Self { deltas })
    }

    /// `{0.1·base·k : k = 1..=5}`.
    pub fn tenths(base: f64) -> Result<Self, JacobianError> {
        Self::new((1..=5).map(|k| 0.1 * base * k as f64).collect())
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// First-order model `C(x₀) + J(x - x₀)` with a block-diagonal `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedCodec {
    grid: BlockGrid,
    blocks: Vec<DenseMatrix>,
    base_point: ImageBuffer,
    base_value: ImageBuffer,
}

impl LinearizedCodec {
    pub fn new(
        grid: BlockGrid,
        blocks: Vec<DenseMatrix>,
        base_point: ImageBuffer,
        base_value: ImageBuffer,
    ) -> Result<Self, ShapeError> {
        base_point.check_same_dims(&base_value)?;
        if grid.image_dims() != base_point.dims() {
            return Err(ShapeError::Mismatch {
                left: grid.image_dims(),
                right: base_point.dims(),
            });
        }
        if blocks.len() != grid.len() {
            return Err(ShapeError::Length {
                expected: grid.len(),
                actual: blocks.len(),
            });
        }
        for (b, m) in grid.blocks().iter().zip(&blocks) {
            if m.rows() != b.len() || m.cols() != b.len() {
                return Err(ShapeError::Mismatch {
                    left: (m.rows(), m.cols()),
                    right: (b.len(), b.len()),
                });
            }
        }
        Ok(Self {
            grid,
            blocks,
            base_point,
            base_value,
        })
    }

    pub fn grid(&self) -> &BlockGrid {
        &self.grid
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn base_point(&self) -> &ImageBuffer {
        &self.base_point
    }

    pub fn base_value(&self) -> &ImageBuffer {
        &self.base_value
    }

    pub fn evaluate(&self, x: &ImageBuffer) -> Result<ImageBuffer, ShapeError> {
        x.check_same_dims(&self.base_point)?;
        let mut out = vec![0.0; x.len()];
        let (mut xb, mut x0b, mut cb) = (Vec::new(), Vec::new(), Vec::new());
        for (i, jac) in self.blocks.iter().enumerate() {
            self.grid.gather(x.samples(), i, &mut xb);
            self.grid.gather(self.base_point.samples(), i, &mut x0b);
            self.grid.gather(self.base_value.samples(), i, &mut cb);
            let dx: Vec<f64> = xb.iter().zip(&x0b).map(|(a, b)| a - b).collect();
            let jdx = jac.mul_vec(&dx)?;
            let val: Vec<f64> = cb.iter().zip(&jdx).map(|(c, d)| c + d).collect();
            self.grid.scatter(&mut out, i, &val);
        }
        x.with_samples(out)
    }
}

/// Averaged central difference for row-major pixel `k`.
///
/// With a declared block structure only the entries of `k`'s block are
/// returned (column-major within the block); otherwise the full
/// row-major column of length `N`.
pub fn estimate_column<C: Codec + ?Sized>(
    codec: &C,
    z: &ImageBuffer,
    k: usize,
    steps: &StepSet,
) -> Result<Vec<f64>, JacobianError> {
    if k >= z.len() {
        return Err(JacobianError::PixelIndex {
            index: k,
            len: z.len(),
        });
    }
    let block = codec
        .block_structure()
        .map(|shape| -> Result<_, JacobianError> {
            let grid = BlockGrid::for_image(z, shape)?;
            let (bi, _) = grid.locate(k / z.width(), k % z.width());
            Ok((grid, bi))
        })
        .transpose()?;

    let mut acc: Option<Vec<f64>> = None;
    let mut scratch = Vec::new();
    for &delta in steps.deltas() {
        let mut plus = z.samples().to_vec();
        let mut minus = z.samples().to_vec();
        plus[k] += delta;
        minus[k] -= delta;
        let plus = codec.apply(&z.with_samples(plus)?)?;
        let minus = codec.apply(&z.with_samples(minus)?)?;
        check_output(z, &plus)?;
        check_output(z, &minus)?;
        let (p, m) = match &block {
            Some((grid, bi)) => {
                grid.gather(plus.samples(), *bi, &mut scratch);
                let p = scratch.clone();
                grid.gather(minus.samples(), *bi, &mut scratch);
                (p, scratch.clone())
            }
            None => (plus.into_samples(), minus.into_samples()),
        };
        let acc = acc.get_or_insert_with(|| vec![0.0; p.len()]);
        for ((a, pi), mi) in acc.iter_mut().zip(&p).zip(&m) {
            *a += (pi - mi) / (2.0 * delta);
        }
    }
    let count = steps.len() as f64;
    Ok(acc
        .expect("step set is non-empty")
        .into_iter()
        .map(|a| a / count)
        .collect())
}

fn check_output(z: &ImageBuffer, out: &ImageBuffer) -> Result<(), JacobianError> {
    if out.dims() != z.dims() {
        return Err(crate::error::CodecError::OutputDimensions {
            expected: z.dims(),
            actual: out.dims(),
        }
        .into());
    }
    Ok(())
}

/// Estimates every diagonal block of the Jacobian at `z`.
///
/// `base_value` must be `C(z)`; it is passed in so that callers who
/// already hold it do not pay for another codec call. Exactly
/// `2·|S|·B_H·B_W` codec calls are made. Entries coupling different
/// blocks are never estimated; for codecs without true block
/// independence the grid is an assumption and those entries are dropped.
pub fn estimate_block_jacobian<C: Codec + ?Sized>(
    codec: &C,
    z: &ImageBuffer,
    base_value: ImageBuffer,
    grid: &BlockGrid,
    steps: &StepSet,
) -> Result<LinearizedCodec, JacobianError> {
    if grid.image_dims() != z.dims() {
        return Err(JacobianError::GridMismatch {
            grid: grid.image_dims(),
            image: z.dims(),
        });
    }
    let BlockShape { height: bh, width: bw } = grid.shape();
    let width = z.width();

    // one batch per nominal local position; each yields the column of
    // every block containing that position
    let batches: Vec<Vec<(usize, usize, Vec<f64>)>> = (0..bh * bw)
        .into_par_iter()
        .map(|pos| {
            let (lr, lc) = (pos % bh, pos / bh);
            let members: Vec<(usize, usize, usize)> = grid
                .blocks()
                .iter()
                .enumerate()
                .filter(|(_, b)| lr < b.height && lc < b.width)
                .map(|(bi, b)| (bi, lc * b.height + lr, (b.row + lr) * width + b.col + lc))
                .collect();
            let mut acc: Vec<Vec<f64>> = members
                .iter()
                .map(|&(bi, _, _)| vec![0.0; grid.blocks()[bi].len()])
                .collect();
            let mut p = Vec::new();
            let mut m = Vec::new();
            for &delta in steps.deltas() {
                let mut plus = z.samples().to_vec();
                let mut minus = z.samples().to_vec();
                for &(_, _, pixel) in &members {
                    plus[pixel] += delta;
                    minus[pixel] -= delta;
                }
                let plus = codec.apply(&z.with_samples(plus)?)?;
                let minus = codec.apply(&z.with_samples(minus)?)?;
                check_output(z, &plus)?;
                check_output(z, &minus)?;
                for (a, &(bi, _, _)) in acc.iter_mut().zip(&members) {
                    grid.gather(plus.samples(), bi, &mut p);
                    grid.gather(minus.samples(), bi, &mut m);
                    for ((ai, pi), mi) in a.iter_mut().zip(&p).zip(&m) {
                        *ai += (pi - mi) / (2.0 * delta);
                    }
                }
            }
            let count = steps.len() as f64;
            Ok(members
                .iter()
                .zip(acc)
                .map(|(&(bi, col, _), a)| (bi, col, a.into_iter().map(|v| v / count).collect()))
                .collect())
        })
        .collect::<Result<_, JacobianError>>()?;

    let mut blocks: Vec<DenseMatrix> = grid
        .blocks()
        .iter()
        .map(|b| DenseMatrix::zeros(b.len(), b.len()))
        .collect();
    for (bi, col, values) in batches.into_iter().flatten() {
        for (r, v) in values.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(ShapeError::NonFinite(r).into());
            }
            blocks[bi].set(r, col, v);
        }
    }
    Ok(LinearizedCodec::new(
        grid.clone(),
        blocks,
        z.clone(),
        base_value,
    )?)
}

/// `C(z)` followed by [`estimate_block_jacobian`].
pub fn linearize<C: Codec + ?Sized>(
    codec: &C,
    z: &ImageBuffer,
    grid: &BlockGrid,
    steps: &StepSet,
) -> Result<LinearizedCodec, JacobianError> {
    let base = codec.apply(z)?;
    check_output(z, &base)?;
    estimate_block_jacobian(codec, z, base, grid, steps)
}
