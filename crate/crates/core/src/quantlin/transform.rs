//! Linear approximation of transform coders `C(x) = U·Q(Uᵀx)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scalar::{fit_scalar, Interval, LinearFit, QuantizerError, ScalarQuantizer};
use crate::matrix::DenseMatrix;

/// Unitary transform followed by per-coefficient scalar quantization.
#[derive(Debug, Clone)]
pub struct TransformCoder {
    basis: DenseMatrix,
    quantizers: Vec<ScalarQuantizer>,
}

/// Shape of the neighborhood a vector fit is optimal over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxArea {
    /// `‖x - x₀‖∞ ≤ δ` in the signal domain.
    Aligned,
    /// `‖Uᵀx - Uᵀx₀‖∞ ≤ δ`, i.e. a cube aligned with the transform axes.
    Rotated,
}

impl std::str::FromStr for ApproxArea {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aligned" => Ok(Self::Aligned),
            "rotated" => Ok(Self::Rotated),
            other => Err(format!("unknown approximation area {other:?} (aligned|rotated)")),
        }
    }
}

/// Monte-Carlo settings for the aligned-area fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed: 0x5eed,
        }
    }
}

/// `C̃(x) = A·x + b` with its local MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorLinearFit {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub lmse: f64,
    /// Samples used, for Monte-Carlo fits.
    pub samples: Option<usize>,
}

impl VectorLinearFit {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a.mul_vec(x).expect("fit dimension");
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        y
    }
}

impl TransformCoder {
    /// `basis` holds the transform vectors as columns; it must satisfy
    /// `UᵀU = I` to within 1e-12 per entry.
    pub fn new(basis: DenseMatrix, quantizers: Vec<ScalarQuantizer>) -> Result<Self, QuantizerError> {
        let n = basis.rows();
        if basis.cols() != n {
            return Err(QuantizerError::Dimension {
                expected: n,
                actual: basis.cols(),
            });
        }
        if quantizers.len() != n {
            return Err(QuantizerError::Dimension {
                expected: n,
                actual: quantizers.len(),
            });
        }
        let gram = basis.gram();
        let dev = gram.max_abs_diff(&DenseMatrix::identity(n));
        if dev > 1e-12 {
            return Err(QuantizerError::NotUnitary(dev));
        }
        Ok(Self { basis, quantizers })
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn quantizers(&self) -> &[ScalarQuantizer] {
        &self.quantizers
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.basis.tr_mul_vec(x).expect("dimension checked by caller")
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        self.basis.mul_vec(coeffs).expect("dimension checked by caller")
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, QuantizerError> {
        self.check_dim(x)?;
        let q: Vec<f64> = self
            .forward(x)
            .iter()
            .zip(&self.quantizers)
            .map(|(&c, q)| q.eval(c))
            .collect();
        Ok(self.inverse(&q))
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), QuantizerError> {
        if x.len() != self.dim() {
            return Err(QuantizerError::Dimension {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Per-coefficient scalar fits over `[x̃₀⁽ⁱ⁾ - δ, x̃₀⁽ⁱ⁾ + δ]`.
    pub fn coefficient_fits(&self, x0: &[f64], delta: f64) -> Result<Vec<LinearFit>, QuantizerError> {
        self.check_dim(x0)?;
        self.forward(x0)
            .iter()
            .zip(&self.quantizers)
            .map(|(&c, q)| Ok(fit_scalar(q, Interval::new(c, delta)?)))
            .collect()
    }

    pub fn fit(
        &self,
        x0: &[f64],
        delta: f64,
        area: ApproxArea,
        mc: MonteCarlo,
    ) -> Result<VectorLinearFit, QuantizerError> {
        match area {
            ApproxArea::Rotated => self.fit_rotated(x0, delta),
            ApproxArea::Aligned => self.fit_aligned(x0, delta, mc),
        }
    }

    fn fit_rotated(&self, x0: &[f64], delta: f64) -> Result<VectorLinearFit, QuantizerError> {
        let fits = self.coefficient_fits(x0, delta)?;
        let n = self.dim();
        let u = &self.basis;
        // A = Σ ã_ii u_i u_iᵀ
        let a = DenseMatrix::from_fn(n, n, |r, c| {
            fits.iter()
                .enumerate()
                .map(|(i, f)| f.a * u.get(r, i) * u.get(c, i))
                .sum()
        })
        .expect("finite fit");
        let b_t: Vec<f64> = fits.iter().map(|f| f.b).collect();
        Ok(VectorLinearFit {
            a,
            b: self.inverse(&b_t),
            lmse: fits.iter().map(|f| f.lmse).sum(),
            samples: None,
        })
    }

    /// Least squares over uniform samples of the signal-domain cube. The
    /// normal equations are accumulated in one pass; the error is measured
    /// in a second pass over the same seeded stream.
    fn fit_aligned(
        &self,
        x0: &[f64],
        delta: f64,
        mc: MonteCarlo,
    ) -> Result<VectorLinearFit, QuantizerError> {
        self.check_dim(x0)?;
        Interval::new(0.0, delta)?;
        if mc.samples < 1000 {
            return Err(QuantizerError::TooFewSamples(mc.samples));
        }
        let n = self.dim();
        let m = n + 1;
        let draw = |rng: &mut ChaCha8Rng, t: &mut [f64]| {
            for ti in t.iter_mut() {
                *ti = rng.random_range(-delta..=delta);
            }
        };

        // features: [t_1..t_n, 1] with t = x - x0
        let mut xtx = vec![0.0; m * m];
        let mut xty = vec![0.0; m * n];
        let mut t = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut feat = vec![0.0; m];
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        for _ in 0..mc.samples {
            draw(&mut rng, &mut t);
            for i in 0..n {
                x[i] = x0[i] + t[i];
                feat[i] = t[i];
            }
            feat[n] = 1.0;
            let y = self.apply(&x)?;
            for i in 0..m {
                for j in 0..m {
                    xtx[i * m + j] += feat[i] * feat[j];
                }
                for (k, yk) in y.iter().enumerate() {
                    xty[i * n + k] += feat[i] * yk;
                }
            }
        }
        let gram = DenseMatrix::new(m, m, xtx).expect("finite moments");
        let mut a = DenseMatrix::zeros(n, n);
        let mut b = vec![0.0; n];
        for k in 0..n {
            let rhs: Vec<f64> = (0..m).map(|i| xty[i * n + k]).collect();
            let coef = gram
                .solve_spd(&rhs)
                .map_err(|_| QuantizerError::TooFewSamples(mc.samples))?;
            for i in 0..n {
                a.set(k, i, coef[i]);
            }
            // intercept is relative to x0
            b[k] = coef[n] - (0..n).map(|i| coef[i] * x0[i]).sum::<f64>();
        }

        let mut fit = VectorLinearFit {
            a,
            b,
            lmse: 0.0,
            samples: Some(mc.samples),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        let mut sse = 0.0;
        for _ in 0..mc.samples {
            draw(&mut rng, &mut t);
            for i in 0..n {
                x[i] = x0[i] + t[i];
            }
            let y = self.apply(&x)?;
            let approx = fit.apply(&x);
            sse += y.iter().zip(&approx).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
        }
        fit.lmse = sse / mc.samples as f64;
        Ok(fit)
    }

    /// Transform-domain pass gains: the diagonal of the rotated-area `Ã*`.
    pub fn filter_response(&self, x0: &[f64], delta: f64) -> Result<Vec<f64>, QuantizerError> {
        Ok(self
            .coefficient_fits(x0, delta)?
            .into_iter()
            .map(|f| f.a)
            .collect())
    }
}

/// Free-function form of [`TransformCoder::fit`].
pub fn fit_transform_coder(
    tc: &TransformCoder,
    x0: &[f64],
    delta: f64,
    area: ApproxArea,
    mc: MonteCarlo,
) -> Result<VectorLinearFit, QuantizerError> {
    tc.fit(x0, delta, area, mc)
}

/// Free-function form of [`TransformCoder::filter_response`].
pub fn filter_response(tc: &TransformCoder, x0: &[f64], delta: f64) -> Result<Vec<f64>, QuantizerError> {
    tc.filter_response(x0, delta)
}

/// `U_{π/4} = (1/√2)[[1, -1], [1, 1]]`.
pub fn rotation_45() -> DenseMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DenseMatrix::new(2, 2, vec![s, -s, s, s]).expect("finite")
}

/// Orthonormal DCT-II basis with the transform vectors as columns, so that
/// `Uᵀx` are the DCT coefficients of `x`.
pub fn dct_basis(n: usize) -> DenseMatrix {
    crate::dct::dct_matrix(n).transpose()
}

/// Uniform quantizers with steps `2^{i/4}`, `i = 1..=n`.
pub fn geometric_steps(n: usize) -> Vec<ScalarQuantizer> {
    (1..=n)
        .map(|i| ScalarQuantizer::UniformMidriser {
            step: 2f64.powf(i as f64 / 4.0),
        })
        .collect()
}
