//! Orthonormal DCT-II on small 2D blocks.

use crate::matrix::DenseMatrix;

/// `D[k][n] = s_k cos(π (2n + 1) k / 2N)` with `s_0 = √(1/N)`, `s_k = √(2/N)`.
pub fn dct_matrix(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |k, i| dct_entry(n, k, i)).expect("finite cosines")
}

fn dct_entry(n: usize, k: usize, i: usize) -> f64 {
    let nf = n as f64;
    let scale = if k == 0 {
        (1.0 / nf).sqrt()
    } else {
        (2.0 / nf).sqrt()
    };
    scale * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()
}

/// Separable 2D transform for `height x width` row-major blocks.
#[derive(Debug, Clone)]
pub struct Dct2 {
    height: usize,
    width: usize,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl Dct2 {
    pub fn new(height: usize, width: usize) -> Self {
        let table = |n: usize| {
            let mut t = Vec::with_capacity(n * n);
            for k in 0..n {
                for i in 0..n {
                    t.push(dct_entry(n, k, i));
                }
            }
            t
        };
        Self {
            height,
            width,
            rows: table(height),
            cols: table(width),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `D_h X D_wᵀ`.
    pub fn forward(&self, block: &[f64], out: &mut [f64]) {
        let (h, w) = (self.height, self.width);
        debug_assert_eq!(block.len(), h * w);
        let mut tmp = vec![0.0; h * w];
        // along rows: tmp[r][k] = Σ_c X[r][c] D_w[k][c]
        for r in 0..h {
            let x = &block[r * w..(r + 1) * w];
            for k in 0..w {
                let d = &self.cols[k * w..(k + 1) * w];
                tmp[r * w + k] = x.iter().zip(d).map(|(a, b)| a * b).sum();
            }
        }
        for k in 0..h {
            let d = &self.rows[k * h..(k + 1) * h];
            for c in 0..w {
                out[k * w + c] = (0..h).map(|r| d[r] * tmp[r * w + c]).sum();
            }
        }
    }

    /// `D_hᵀ C D_w`.
    pub fn inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        let (h, w) = (self.height, self.width);
        debug_assert_eq!(coeffs.len(), h * w);
        let mut tmp = vec![0.0; h * w];
        for r in 0..h {
            for c in 0..w {
                tmp[r * w + c] = (0..h).map(|k| self.rows[k * h + r] * coeffs[k * w + c]).sum();
            }
        }
        for r in 0..h {
            for c in 0..w {
                out[r * w + c] = (0..w).map(|k| tmp[r * w + k] * self.cols[k * w + c]).sum();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_orthonormal() {
        for n in [1, 2, 7, 8, 32] {
            let d = dct_matrix(n);
            let g = d.matmul(&d.transpose()).unwrap();
            assert!(g.max_abs_diff(&DenseMatrix::identity(n)) < 1e-13);
        }
    }

    #[test]
    fn round_trip_and_dc() {
        let t = Dct2::new(8, 5);
        let x: Vec<f64> = (0..40).map(|i| (i * 37 % 11) as f64).collect();
        let mut c = vec![0.0; 40];
        let mut back = vec![0.0; 40];
        t.forward(&x, &mut c);
        t.inverse(&c, &mut back);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let flat = vec![3.0; 40];
        t.forward(&flat, &mut c);
        assert!((c[0] - 3.0 * 40f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }
}
