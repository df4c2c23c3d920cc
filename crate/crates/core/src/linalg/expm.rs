//! Matrix exponential by scaling-and-squaring of the power series.

use num_complex::Complex64;

use super::matrix::{CMatrix, LinalgError};

const MAX_SQUARINGS: u32 = 64;
const MAX_TERMS: usize = 80;

/// expm(a) for square `a`; expm(0) = I. Errors when the required scaling
/// exceeds the cap (entries far beyond representable growth).
pub fn expm(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.all_finite() {
        return Err(LinalgError::ExpmOverflow {
            norm: f64::INFINITY,
        });
    }
    let n = a.rows();
    let norm = a.frobenius_norm();
    let mut squarings: u32 = 0;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32 + 1;
    }
    if squarings > MAX_SQUARINGS {
        return Err(LinalgError::ExpmOverflow { norm });
    }
    let scale = 0.5f64.powi(squarings as i32);
    let scaled = a.scale(Complex64::new(scale, 0.0));

    // Taylor series on the scaled matrix.
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
        if term.frobenius_norm() <= 1e-18 * sum.frobenius_norm().max(1.0) {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = out.mul(&out);
    }
    Ok(out)
}
