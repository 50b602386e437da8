//! Plug-and-Play ADMM restoration of a decompressed image.
//!
//! Starting from `x̂ = v̂ = y` and `u = 0`, each iteration
//!
//! 1. linearizes the codec around `x̂`,
//! 2. solves `min ‖y - C_lin(x)‖² + λ/2‖x - (v̂ - u)‖² + μ‖x - x̂‖²` blockwise,
//! 3. denoises `x̂ + u` at noise level `sqrt(β/λ)`,
//! 4. updates `u ← u + x̂ - v̂`,
//!
//! and stops once the mean absolute change of `u` drops below a threshold,
//! grows, or the iteration budget is spent.

use rayon::prelude::*;
use thiserror::Error;

use crate::codecs::Codec;
use crate::denoise::Denoiser;
use crate::error::{CodecError, DenoiseError, JacobianError, ShapeError};
use crate::image::{BlockGrid, BlockShape, ImageBuffer};
use crate::jacobian::{estimate_block_jacobian, LinearizedCodec, StepSet};
use crate::matrix::DenseMatrix;
use crate::metrics::psnr;
use crate::quantlin::{fit_scalar, Interval, ScalarQuantizer};

pub const DEFAULT_STOP_THRESHOLD: f64 = 0.05;

/// Which iterate is returned as the restoration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputIterate {
    /// Data-consistent iterate `x̂`.
    X,
    /// Denoised iterate `v̂`.
    #[default]
    V,
}

impl std::str::FromStr for OutputIterate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" => Ok(Self::X),
            "v" => Ok(Self::V),
            other => Err(format!("output iterate must be x or v, got {other:?}")),
        }
    }
}

impl std::fmt::Display for OutputIterate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::X => "x",
            Self::V => "v",
        })
    }
}

/// How the codec is linearized each iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Linearization {
    /// Averaged central differences along the pixel axes.
    #[default]
    FiniteDifference,
    /// Closed-form fit of the pair codec over cubes aligned with its
    /// transform axes: each 2x1 block is `U·diag(ã)·Uᵀ`, where `ã_i`
    /// averages the optimal scalar slopes over the configured steps.
    /// Requires a pair codec with the given step and zero offset.
    PairRotated { step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
    pub steps: StepSet,
    pub max_iters: usize,
    pub stop_threshold: f64,
    /// Block shape of the Jacobian; assumed when the codec declares none.
    pub block_shape: BlockShape,
    pub clip_output: bool,
    pub output: OutputIterate,
    pub linearization: Linearization,
}

impl SolverConfig {
    pub fn new(
        lambda: f64,
        beta: f64,
        mu: f64,
        steps: StepSet,
        max_iters: usize,
        block_shape: BlockShape,
    ) -> Self {
        Self {
            lambda,
            beta,
            mu,
            steps,
            max_iters,
            stop_threshold: DEFAULT_STOP_THRESHOLD,
            block_shape,
            clip_output: true,
            output: OutputIterate::V,
            linearization: Linearization::FiniteDifference,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::Config(what.to_string()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad("mu must be non-negative");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.stop_threshold > 0.0 && self.stop_threshold.is_finite()) {
            return bad("stop threshold must be positive");
        }
        if self.block_shape.area() == 0 {
            return bad("block shape must be non-empty");
        }
        if let Linearization::PairRotated { step } = self.linearization {
            if !(step > 0.0 && step.is_finite()) {
                return bad("pair step must be positive");
            }
            if self.block_shape != BlockShape::new(2, 1) {
                return bad("rotated pair linearization needs 2x1 blocks");
            }
        }
        Ok(())
    }

    /// Noise standard deviation handed to the denoiser.
    pub fn denoiser_sigma(&self) -> f64 {
        (self.beta / self.lambda).sqrt()
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Jacobian(#[from] JacobianError),
    #[error(transparent)]
    Denoise(#[from] DenoiseError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Iterates and per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x_hat: ImageBuffer,
    pub v_hat: ImageBuffer,
    pub u: ImageBuffer,
    /// Completed iterations.
    pub iteration: usize,
    /// Mean absolute change of `u` made by each iteration.
    pub delta_u: Vec<f64>,
    /// `‖y - C(x̂)‖²` after each iteration.
    pub objective: Vec<f64>,
    /// PSNR of the selected output iterate against `y` after each iteration.
    pub psnr_vs_input: Vec<f64>,
}

impl SolverState {
    fn initial(y: &ImageBuffer) -> Self {
        Self {
            x_hat: y.clone(),
            v_hat: y.clone(),
            u: ImageBuffer::filled(y.height(), y.width(), 0.0).expect("y has valid dimensions"),
            iteration: 0,
            delta_u: Vec::new(),
            objective: Vec::new(),
            psnr_vs_input: Vec::new(),
        }
    }

    pub fn output(&self, which: OutputIterate) -> &ImageBuffer {
        match which {
            OutputIterate::X => &self.x_hat,
            OutputIterate::V => &self.v_hat,
        }
    }
}

/// A failed run together with the last consistent state.
#[derive(Debug, Error)]
#[error("{source} (after {} iterations)", state.iteration)]
pub struct RunError {
    #[source]
    pub source: SolverError,
    pub state: Box<SolverState>,
}

/// Minimizes `‖y - C_lin(x)‖² + λ/2‖x - x̃‖² + μ‖x - x_prev‖²` block by block.
///
/// Each block solves the normal equations
/// `(2JᵀJ + (λ + 2μ)I)·x = 2Jᵀ(y - d) + λ·x̃ + 2μ·x_prev` with
/// `d = C(x₀) - J·x₀`, written in terms of the step `x - x_prev`.
pub fn x_step(
    lin: &LinearizedCodec,
    y: &ImageBuffer,
    x_tilde: &ImageBuffer,
    x_prev: &ImageBuffer,
    lambda: f64,
    mu: f64,
) -> Result<ImageBuffer, SolverError> {
    if !(lambda >= 0.0 && mu >= 0.0 && lambda + mu > 0.0) {
        return Err(SolverError::Config(
            "x-step needs lambda > 0 or mu > 0".into(),
        ));
    }
    let x0 = lin.base_point();
    y.check_same_dims(x0)?;
    x_tilde.check_same_dims(x0)?;
    x_prev.check_same_dims(x0)?;
    let grid = lin.grid();

    let solved: Vec<Vec<f64>> = lin
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(i, jac)| {
            let g = |img: &ImageBuffer| {
                let mut v = Vec::new();
                grid.gather(img.samples(), i, &mut v);
                v
            };
            let (yb, xt, xp, x0b, cb) = (
                g(y),
                g(x_tilde),
                g(x_prev),
                g(x0),
                g(lin.base_value()),
            );
            // solve for the step z = x - x_prev; at a fixed point the
            // right-hand side is exactly zero
            let dx: Vec<f64> = xp.iter().zip(&x0b).map(|(a, b)| a - b).collect();
            let jdx = jac.mul_vec(&dx)?;
            let resid: Vec<f64> = (0..yb.len()).map(|k| yb[k] - (cb[k] + jdx[k])).collect();
            let jt_resid = jac.tr_mul_vec(&resid)?;
            let rhs: Vec<f64> = (0..yb.len())
                .map(|k| 2.0 * jt_resid[k] + lambda * (xt[k] - xp[k]))
                .collect();
            let mut system = jac.gram();
            for k in 0..yb.len() {
                for l in 0..yb.len() {
                    let v = 2.0 * system.get(k, l) + if k == l { lambda + 2.0 * mu } else { 0.0 };
                    system.set(k, l, v);
                }
            }
            let z = system.solve_spd(&rhs)?;
            Ok(xp.iter().zip(&z).map(|(a, b)| a + b).collect())
        })
        .collect::<Result<_, ShapeError>>()?;

    let mut out = vec![0.0; y.len()];
    for (i, block) in solved.iter().enumerate() {
        grid.scatter(&mut out, i, block);
    }
    Ok(y.with_samples(out)?)
}

/// Denoises `v_tilde` at noise standard deviation `sigma`.
pub fn v_step<D: Denoiser + ?Sized>(
    denoiser: &D,
    v_tilde: &ImageBuffer,
    sigma: f64,
) -> Result<ImageBuffer, SolverError> {
    let out = denoiser.denoise(v_tilde, sigma)?;
    if out.dims() != v_tilde.dims() {
        return Err(ShapeError::Mismatch {
            left: out.dims(),
            right: v_tilde.dims(),
        }
        .into());
    }
    Ok(out)
}

/// Closed-form linearization of the pair codec over transform-aligned cubes.
pub fn pair_rotated_linearization(
    x0: &ImageBuffer,
    base_value: ImageBuffer,
    grid: &BlockGrid,
    step: f64,
    steps: &StepSet,
) -> Result<LinearizedCodec, SolverError> {
    let q = ScalarQuantizer::uniform(step).map_err(|e| SolverError::Config(e.to_string()))?;
    let slope = |c: f64| -> Result<f64, SolverError> {
        let mut total = 0.0;
        for &delta in steps.deltas() {
            let iv = Interval::new(c, delta).map_err(|e| SolverError::Config(e.to_string()))?;
            total += fit_scalar(&q, iv).a;
        }
        Ok(total / steps.len() as f64)
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut blocks = Vec::with_capacity(grid.len());
    let mut v = Vec::new();
    for i in 0..grid.len() {
        grid.gather(x0.samples(), i, &mut v);
        let block = match v.as_slice() {
            [top, bottom] => {
                let a0 = slope(s * (top + bottom))?;
                let a1 = slope(s * (bottom - top))?;
                // U diag(a0, a1) Uᵀ with U = s[[1, -1], [1, 1]]
                let (d, o) = (0.5 * (a0 + a1), 0.5 * (a0 - a1));
                DenseMatrix::new(2, 2, vec![d, o, o, d])?
            }
            [single] => DenseMatrix::new(1, 1, vec![slope(*single)?])?,
            _ => {
                return Err(SolverError::Config(
                    "rotated pair linearization needs 2x1 blocks".into(),
                ))
            }
        };
        blocks.push(block);
    }
    Ok(LinearizedCodec::new(grid.clone(), blocks, x0.clone(), base_value)?)
}

fn mean_abs_diff(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        / a.len() as f64
}

fn squared_error(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(p, q)| (p - q) * (p - q))
        .sum()
}

/// Restores `y` and returns the selected iterate (clipped to `[0, 255]`
/// when configured) with the full state.
pub fn run<C: Codec + ?Sized, D: Denoiser + ?Sized>(
    codec: &C,
    y: &ImageBuffer,
    denoiser: &D,
    cfg: &SolverConfig,
) -> Result<(ImageBuffer, SolverState), RunError> {
    run_observed(codec, y, denoiser, cfg, |_, _| {})
}

/// [`run`], calling `observe(u_before, state)` after every iteration.
pub fn run_observed<C, D, F>(
    codec: &C,
    y: &ImageBuffer,
    denoiser: &D,
    cfg: &SolverConfig,
    mut observe: F,
) -> Result<(ImageBuffer, SolverState), RunError>
where
    C: Codec + ?Sized,
    D: Denoiser + ?Sized,
    F: FnMut(&ImageBuffer, &SolverState),
{
    let mut state = SolverState::initial(y);
    match iterate(codec, y, denoiser, cfg, &mut state, &mut observe) {
        Ok(()) => {
            let out = state.output(cfg.output);
            let out = if cfg.clip_output {
                out.clamp(0.0, 255.0)
            } else {
                out.clone()
            };
            Ok((out, state))
        }
        Err(source) => Err(RunError {
            source,
            state: Box::new(state),
        }),
    }
}

fn iterate<C: Codec + ?Sized, D: Denoiser + ?Sized>(
    codec: &C,
    y: &ImageBuffer,
    denoiser: &D,
    cfg: &SolverConfig,
    state: &mut SolverState,
    observe: &mut dyn FnMut(&ImageBuffer, &SolverState),
) -> Result<(), SolverError> {
    cfg.validate()?;
    let grid = BlockGrid::for_image(y, cfg.block_shape)?;
    let sigma = cfg.denoiser_sigma();
    let mut coded = codec.apply(y)?;
    coded.check_same_dims(y)?;

    for _ in 0..cfg.max_iters {
        let lin = match cfg.linearization {
            Linearization::FiniteDifference => {
                estimate_block_jacobian(codec, &state.x_hat, coded, &grid, &cfg.steps)?
            }
            Linearization::PairRotated { step } => {
                pair_rotated_linearization(&state.x_hat, coded, &grid, step, &cfg.steps)?
            }
        };
        let x_tilde = state.v_hat.zip_map(&state.u, |v, u| v - u)?;
        let x_hat = x_step(&lin, y, &x_tilde, &state.x_hat, cfg.lambda, cfg.mu)?;
        let v_tilde = x_hat.zip_map(&state.u, |x, u| x + u)?;
        let v_hat = v_step(denoiser, &v_tilde, sigma)?;
        let u_next = state
            .u
            .with_samples(
                state
                    .u
                    .samples()
                    .iter()
                    .zip(x_hat.samples().iter().zip(v_hat.samples()))
                    .map(|(u, (x, v))| u + (x - v))
                    .collect(),
            )?;
        let delta_u = mean_abs_diff(&u_next, &state.u);
        coded = codec.apply(&x_hat)?;
        coded.check_same_dims(y)?;

        state.x_hat = x_hat;
        state.v_hat = v_hat;
        let u_before = std::mem::replace(&mut state.u, u_next);
        state.iteration += 1;
        state.objective.push(squared_error(y, &coded));
        state.psnr_vs_input.push(
            psnr(y, state.output(cfg.output)).map_err(|e| match e {
                crate::error::MetricError::Shape(s) => SolverError::Shape(s),
                other => SolverError::Config(other.to_string()),
            })?,
        );
        let grew = state
            .delta_u
            .last()
            .is_some_and(|previous| delta_u > *previous);
        state.delta_u.push(delta_u);
        observe(&u_before, state);
        if delta_u < cfg.stop_threshold || grew {
            break;
        }
    }
    Ok(())
}
