//! Dense complex matrices stored row-major.
//!
//! Matrices are immutable values: every operation returns a fresh result.
//! Shape mismatches are programmer errors and panic; resource limits
//! (dimension caps, convergence) are reported through [`LinalgError`].

use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on the total dimension (rows * cols) a `kron` result may reach.
/// Exceeding the cap is an error, never a silent truncation.
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension {got} exceeds cap {cap}")]
    DimCap { got: usize, cap: usize },
    #[error("SVD failed to converge after {iterations} iterations (off-diagonal {offdiag:.3e})")]
    SvdNonConvergence { iterations: usize, offdiag: f64 },
    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal {offdiag:.3e})")]
    EigNonConvergence { sweeps: usize, offdiag: f64 },
    #[error("matrix exponential overflow: scaled norm {norm:.3e} beyond cap")]
    ExpmOverflow { norm: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix unit e_{ij} (1-based construction is the caller's concern; indices here are 0-based).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[i * cols + j] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(
            &entries
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in add"
        );
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in sub"
        );
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Matrix product. Skips zero entries of `self`, which makes products of
    /// the sparse sign-string generators cheap without a sparse format.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_b = &other.data[k * n..(k + 1) * n];
                let row_o = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    row_o[j] += a * row_b[j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference, the residual used by the relation checks.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product under the default dimension cap.
    pub fn kron(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.kron_with_cap(other, DEFAULT_DIM_CAP)
    }

    /// Kronecker product; errors out when rows*cols of the result exceeds `cap`.
    pub fn kron_with_cap(&self, other: &CMatrix, cap: usize) -> Result<CMatrix, LinalgError> {
        let rows = self.rows.checked_mul(other.rows);
        let cols = self.cols.checked_mul(other.cols);
        let (rows, cols) = match (rows, cols) {
            (Some(r), Some(c)) => (r, c),
            _ => {
                return Err(LinalgError::DimCap {
                    got: usize::MAX,
                    cap,
                })
            }
        };
        let total = rows.checked_mul(cols).unwrap_or(usize::MAX);
        if rows.max(cols) > cap || total > cap * cap {
            return Err(LinalgError::DimCap {
                got: rows.max(cols),
                cap,
            });
        }
        let mut out = CMatrix::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.data[i1 * self.cols + j1];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for i2 in 0..other.rows {
                    let dst_row = i1 * other.rows + i2;
                    for j2 in 0..other.cols {
                        out.data[dst_row * cols + j1 * other.cols + j2] =
                            a * other.data[i2 * other.cols + j2];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Stack blocks vertically: [b_1; b_2; ...]. All blocks must share a column count.
    pub fn vstack(blocks: &[CMatrix]) -> CMatrix {
        assert!(!blocks.is_empty(), "vstack of nothing");
        let cols = blocks[0].cols;
        assert!(
            blocks.iter().all(|b| b.cols == cols),
            "vstack column mismatch"
        );
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        CMatrix { rows, cols, data }
    }

    /// Stack blocks horizontally: [b_1, b_2, ...]. All blocks must share a row count.
    pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
        assert!(!blocks.is_empty(), "hstack of nothing");
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hstack row mismatch");
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for i in 0..rows {
                out.data[i * cols + offset..i * cols + offset + b.cols]
                    .copy_from_slice(&b.data[i * b.cols..(i + 1) * b.cols]);
            }
            offset += b.cols;
        }
        out
    }

    /// Determinant by LU with partial pivoting. Intended for small matrices.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square(), "det of non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                for j in k..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

/// Internal mutable access for the factorization routines in this module tree.
pub(crate) trait MatrixScratch {
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64;
}

impl MatrixScratch for CMatrix {
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let c = self.cols;
        &mut self.data[i * c + j]
    }
}
