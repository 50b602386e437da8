//! Optimal local linear fits `q(x) ≈ a·x + b` of scalar quantizers.
//!
//! Every quantizer here is piecewise constant, so the least-squares
//! moments over an interval reduce to finite sums over the decision
//! regions the interval touches. No quadrature is involved.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizerError {
    #[error("interval half-width must be positive and finite (got {0})")]
    HalfWidth(f64),
    #[error("interval center must be finite (got {0})")]
    Center(f64),
    #[error("quantizer step must be positive and finite (got {0})")]
    Step(f64),
    #[error("need one more level than boundaries ({boundaries} boundaries, {levels} levels)")]
    LevelCount { boundaries: usize, levels: usize },
    #[error("decision boundaries must be finite and strictly increasing")]
    Boundaries,
    #[error("representation levels must be finite")]
    Levels,
    #[error("oracle needs at least 1000 samples (got {0})")]
    TooFewSamples(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("transform is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
}

/// Scalar quantizer `q: R -> R`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarQuantizer {
    /// `-1/2` for `x <= 0`, `+1/2` for `x > 0`.
    TwoLevel,
    /// Mid-riser `(floor(x/Δ) + 1/2)·Δ`.
    UniformMidriser { step: f64 },
    /// Level `i` covers `(d[i-1], d[i]]`, i.e. a boundary belongs to the
    /// region below it, matching [`ScalarQuantizer::TwoLevel`].
    General {
        boundaries: Vec<f64>,
        levels: Vec<f64>,
    },
}

impl ScalarQuantizer {
    pub fn uniform(step: f64) -> Result<Self, QuantizerError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(QuantizerError::Step(step));
        }
        Ok(Self::UniformMidriser { step })
    }

    pub fn general(boundaries: Vec<f64>, levels: Vec<f64>) -> Result<Self, QuantizerError> {
        if levels.len() != boundaries.len() + 1 {
            return Err(QuantizerError::LevelCount {
                boundaries: boundaries.len(),
                levels: levels.len(),
            });
        }
        if boundaries.iter().any(|d| !d.is_finite()) || boundaries.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(QuantizerError::Boundaries);
        }
        if levels.iter().any(|r| !r.is_finite()) {
            return Err(QuantizerError::Levels);
        }
        Ok(Self::General { boundaries, levels })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::TwoLevel => {
                if x <= 0.0 {
                    -0.5
                } else {
                    0.5
                }
            }
            Self::UniformMidriser { step } => ((x / step).floor() + 0.5) * step,
            Self::General { boundaries, levels } => {
                levels[boundaries.partition_point(|&d| d < x)]
            }
        }
    }

    /// Decision boundaries strictly inside `(lo, hi)`, ascending.
    pub fn boundaries_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Self::TwoLevel => {
                if lo < 0.0 && 0.0 < hi {
                    vec![0.0]
                } else {
                    Vec::new()
                }
            }
            Self::UniformMidriser { step } => {
                let first = (lo / step).floor() as i64 + 1;
                let last = (hi / step).ceil() as i64 - 1;
                (first..=last)
                    .map(|k| k as f64 * step)
                    .filter(|&d| lo < d && d < hi)
                    .collect()
            }
            Self::General { boundaries, .. } => boundaries
                .iter()
                .copied()
                .filter(|&d| lo < d && d < hi)
                .collect(),
        }
    }

    /// Constant pieces `(start, end, level)` covering `[lo, hi]`.
    pub(crate) fn pieces(&self, lo: f64, hi: f64) -> Vec<(f64, f64, f64)> {
        let mut edges = Vec::with_capacity(8);
        edges.push(lo);
        edges.extend(self.boundaries_within(lo, hi));
        edges.push(hi);
        edges
            .windows(2)
            .map(|w| (w[0], w[1], self.eval(0.5 * (w[0] + w[1]))))
            .collect()
    }

    /// A general quantizer that agrees with `s·q` on `[lo, hi]`. Outside
    /// the window the outermost levels extend to infinity.
    pub fn scaled_output(&self, s: f64, lo: f64, hi: f64) -> Result<Self, QuantizerError> {
        let boundaries = self.boundaries_within(lo, hi);
        let levels = self.pieces(lo, hi).iter().map(|p| p.2 * s).collect();
        Self::general(boundaries, levels)
    }
}

/// Closed interval `[center - half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    center: f64,
    half_width: f64,
}

impl Interval {
    pub fn new(center: f64, half_width: f64) -> Result<Self, QuantizerError> {
        if !center.is_finite() {
            return Err(QuantizerError::Center(center));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(QuantizerError::HalfWidth(half_width));
        }
        Ok(Self { center, half_width })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }
}

/// Linear approximation `a·x + b` and its mean squared error over an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub lmse: f64,
}

/// Mean of `(q(x) - a·x - b)²` over the interval, integrated piece by piece.
///
/// Each piece is expanded around its own midpoint so every term is a
/// non-negative sum and nothing cancels.
pub fn local_mse(q: &ScalarQuantizer, iv: Interval, a: f64, b: f64) -> f64 {
    let total: f64 = q
        .pieces(iv.lo(), iv.hi())
        .into_iter()
        .map(|(s, e, r)| {
            let h = 0.5 * (e - s);
            let m = 0.5 * (e + s);
            let w = r - a * m - b;
            2.0 * h * (w * w + a * a * h * h / 3.0)
        })
        .sum();
    total / (2.0 * iv.half_width())
}

/// Analytically optimal linear fit of `q` over `iv`.
pub fn fit_scalar(q: &ScalarQuantizer, iv: Interval) -> LinearFit {
    let (x0, delta) = (iv.center(), iv.half_width());
    let pieces = q.pieces(iv.lo(), iv.hi());
    // levels relative to q(x0) and positions relative to x0 keep the
    // moments small when the interval sits far from the origin
    let reference = q.eval(x0);
    let mut mean = 0.0;
    let mut first_moment = 0.0;
    for &(s, e, r) in &pieces {
        let len = e - s;
        let rel = r - reference;
        mean += rel * len;
        first_moment += rel * len * (0.5 * (s + e) - x0);
    }
    mean /= 2.0 * delta;
    first_moment /= 2.0 * delta;
    let a = 3.0 * first_moment / (delta * delta);
    let b = (mean + reference) - a * x0;
    LinearFit {
        a,
        b,
        lmse: local_mse(q, iv, a, b),
    }
}

/// Least-squares line through `n_samples` midpoint-rule samples of `q`.
pub fn fit_scalar_oracle(
    q: &ScalarQuantizer,
    iv: Interval,
    n_samples: usize,
) -> Result<LinearFit, QuantizerError> {
    if n_samples < 1000 {
        return Err(QuantizerError::TooFewSamples(n_samples));
    }
    let (x0, delta) = (iv.center(), iv.half_width());
    let reference = q.eval(x0);
    let h = 2.0 * delta / n_samples as f64;
    let t_at = |i: usize| -delta + (i as f64 + 0.5) * h;

    let n = n_samples as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n_samples {
        let t = t_at(i);
        let y = q.eval(x0 + t) - reference;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let cov = sty - st * sy / n;
    let var = stt - st * st / n;
    let slope = cov / var;
    let intercept_t = (sy - slope * st) / n;

    let mut sse = 0.0;
    for i in 0..n_samples {
        let t = t_at(i);
        let r = q.eval(x0 + t) - reference - slope * t - intercept_t;
        sse += r * r;
    }
    Ok(LinearFit {
        a: slope,
        b: intercept_t + reference - slope * x0,
        lmse: sse / n,
    })
}

/// Closed form for the normalized two-level quantizer.
pub fn two_level_closed_form(iv: Interval) -> LinearFit {
    let (x0, delta) = (iv.center(), iv.half_width());
    if delta <= x0.abs() {
        return LinearFit {
            a: 0.0,
            b: if x0 > 0.0 { 0.5 } else { -0.5 },
            lmse: 0.0,
        };
    }
    let ratio = x0 / delta;
    let r2 = ratio * ratio;
    LinearFit {
        a: 0.75 / delta * (1.0 - r2),
        b: 0.75 * ratio * (r2 - 1.0 / 3.0),
        lmse: (1.0 + 3.0 * r2) * (1.0 - r2) / 16.0,
    }
}

/// Uniform mid-riser fit assembled from shifted two-level fits.
///
/// With unit step, `floor(x) + 1/2` equals the sum of `q₂(x - τ)` over the
/// boundaries `τ` inside the interval plus a constant that collects the
/// (locally flat) contributions of every boundary outside it. The slope
/// and intercept are summed term by term; the error is integrated
/// directly because the shifted terms are not orthogonal.
pub fn uniform_closed_form(step: f64, iv: Interval) -> Result<LinearFit, QuantizerError> {
    let q = ScalarQuantizer::uniform(step)?;
    // normalize to unit step, then move the center into [0, 1)
    let x0 = iv.center() / step;
    let delta = iv.half_width() / step;
    let cell = x0.floor();
    let x0 = x0 - cell;
    let (lo, hi) = (x0 - delta, x0 + delta);

    let first = lo.floor() as i64 + 1;
    let last = hi.ceil() as i64 - 1;
    let taus: Vec<i64> = (first..=last)
        .filter(|&t| lo < t as f64 && (t as f64) < hi)
        .collect();

    let (mut a, mut b) = (0.0, 0.0);
    match (taus.first(), taus.last()) {
        (Some(&k1), Some(&k2)) => {
            for &tau in &taus {
                let tau = tau as f64;
                let term = two_level_closed_form(Interval::new(x0 - tau, delta)?);
                a += term.a;
                b += term.b - term.a * tau;
            }
            b += 0.5 * (k1 + k2) as f64;
        }
        _ => b = x0.floor() + 0.5,
    }

    // undo the shift by `cell` and the unit-step normalization
    let a_signal = a;
    let b_signal = (b + cell - a * cell) * step;
    Ok(LinearFit {
        a: a_signal,
        b: b_signal,
        lmse: local_mse(&q, iv, a_signal, b_signal),
    })
}
