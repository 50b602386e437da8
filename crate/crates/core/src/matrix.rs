use crate::error::ShapeError;

/// Small row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, ShapeError> {
        if rows == 0 || cols == 0 {
            return Err(ShapeError::EmptyDimensions {
                height: rows,
                width: cols,
            });
        }
        if entries.len() != rows * cols {
            return Err(ShapeError::Length {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(ShapeError::NonFinite(i));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ShapeError> {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, ShapeError> {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| if r == c { diag[r] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    /// Sets one entry; the value must be finite.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(v.is_finite());
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, ShapeError> {
        if v.len() != self.cols {
            return Err(ShapeError::Length {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok(self
            .entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `selfᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, ShapeError> {
        if v.len() != self.rows {
            return Err(ShapeError::Length {
                expected: self.rows,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (row, &s) in self.entries.chunks_exact(self.cols).zip(v) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * s;
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self, ShapeError> {
        if self.cols != other.rows {
            return Err(ShapeError::Mismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.entries[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᵀ self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for row in self.entries.chunks_exact(n) {
            for i in 0..n {
                if row[i] == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.entries[i * n + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.entries[i * n + j] = g.entries[j * n + i];
            }
        }
        g
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Solves `self x = rhs` for symmetric positive definite `self` by Cholesky.
    pub fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>, ShapeError> {
        let n = self.rows;
        if self.cols != n {
            return Err(ShapeError::Mismatch {
                left: (self.rows, self.cols),
                right: (n, n),
            });
        }
        if rhs.len() != n {
            return Err(ShapeError::Length {
                expected: n,
                actual: rhs.len(),
            });
        }
        // lower factor, row-major
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(ShapeError::NotPositiveDefinite);
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        Ok(x)
    }
}
