//! Default solver parameters per codec family.

use std::str::FromStr;

use crate::error::JacobianError;
use crate::image::BlockShape;
use crate::jacobian::StepSet;
use crate::quantlin::ApproxArea;
use crate::solver::SolverConfig;

/// Codec families with tabulated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecKind {
    /// Pixelwise uniform quantization; `r` is the bit-rate in bpp.
    Scalar,
    /// Rotated pixel pairs; `r` is the effective rate `16 - log₂Δ`.
    Pair,
    /// JPEG-like block DCT; `r` is the bit-rate in bpp.
    Dct,
}

impl FromStr for CodecKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(Self::Scalar),
            "pair" => Ok(Self::Pair),
            "dct" => Ok(Self::Dct),
            other => Err(format!("no preset for codec kind {other:?}")),
        }
    }
}

impl std::fmt::Display for CodecKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Scalar => "scalar",
            Self::Pair => "pair",
            Self::Dct => "dct",
        })
    }
}

/// Preset parameters together with the effective step `Δ̃` that sets the
/// finite-difference steps `{0.1·Δ̃·k : k = 1..=5}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub config: SolverConfig,
    pub effective_step: f64,
}

/// Tabulated parameters for `kind` at rate `r`.
///
/// `area` only matters for the pair codec, whose `β` depends on the
/// approximation area.
pub fn preset(kind: CodecKind, r: f64, area: ApproxArea) -> Result<Preset, JacobianError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(JacobianError::InvalidSteps);
    }
    let (max_iters, lambda, beta, mu, effective_step, shape) = match kind {
        CodecKind::Scalar => (
            6,
            0.01,
            500.0 * 2f64.powf(-2.0 * r),
            5e-4 * 2f64.powf(0.6 * r),
            256.0 / 2f64.powf(r),
            BlockShape::new(1, 1),
        ),
        CodecKind::Pair => (
            10,
            0.03,
            match area {
                ApproxArea::Aligned => 200.0,
                ApproxArea::Rotated => 500.0,
            } * 2f64.powf(-0.5 * r),
            5e-5 * 2f64.powf(0.8 * r),
            2f64.powf(16.0 - r),
            BlockShape::new(2, 1),
        ),
        CodecKind::Dct => (
            8,
            0.15,
            2.0 / r,
            0.01 * 2f64.powf(r),
            135.0 / r,
            BlockShape::new(8, 8),
        ),
    };
    Ok(Preset {
        config: SolverConfig::new(lambda, beta, mu, StepSet::tenths(effective_step)?, max_iters, shape),
        effective_step,
    })
}
