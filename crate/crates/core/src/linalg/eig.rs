//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//! Robust at the dimensions this crate uses (a few hundred at most) and
//! independent of the SVD path, so the two can cross-check each other.

use num_complex::Complex64;

use super::matrix::{CMatrix, LinalgError, MatrixScratch};

const MAX_SWEEPS: usize = 100;

/// `a = q * diag(w) * q^H` with eigenvalues ascending. `a` must be Hermitian;
/// only the upper triangle is read.
pub fn eigh(a: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut m = CMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i <= j {
                a[(i, j)]
            } else {
                a[(j, i)].conj()
            }
        },
    );
    let mut q = CMatrix::identity(n);
    let norm = m.frobenius_norm().max(1.0);

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for c in p + 1..n {
                    s += m[(p, c)].norm_sqr();
                }
            }
            s.sqrt()
        };
        if off <= 1e-14 * norm {
            let mut w: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
            sort_ascending(&mut w, &mut q);
            return Ok((w, q));
        }
        let _ = sweep;
        for p in 0..n {
            for c in p + 1..n {
                jacobi_rotate(&mut m, &mut q, p, c);
            }
        }
    }
    let off = (0..n)
        .flat_map(|p| (p + 1..n).map(move |c| (p, c)))
        .map(|(p, c)| m[(p, c)].norm())
        .fold(0.0, f64::max);
    Err(LinalgError::EigNonConvergence {
        sweeps: MAX_SWEEPS,
        offdiag: off,
    })
}

/// Operator norm of a Hermitian matrix from its spectrum.
pub fn hermitian_operator_norm(a: &CMatrix) -> Result<f64, LinalgError> {
    let (w, _) = eigh(a)?;
    Ok(w.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())))
}

/// PSD square root via the spectral decomposition; small negative
/// eigenvalues from roundoff are clamped to zero.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let (w, q) = eigh(a)?;
    let n = a.rows();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let s = w[r].max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        for i in 0..n {
            let qi = q[(i, r)] * s;
            for j in 0..n {
                *out.at_mut(i, j) += qi * q[(j, r)].conj();
            }
        }
    }
    Ok(out)
}

fn sort_ascending(w: &mut [f64], q: &mut CMatrix) {
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
    let wq = q.clone();
    let ws: Vec<f64> = order.iter().map(|&i| w[i]).collect();
    w.copy_from_slice(&ws);
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            *q.at_mut(r, newc) = wq[(r, oldc)];
        }
    }
}

/// Zero out m[p][c] with the unitary two-plane rotation
/// J[p][p]=cos, J[p][c]=sin*e^{i th}, J[c][p]=-sin*e^{-i th}, J[c][c]=cos,
/// where m[p][c] = r e^{i th}.
fn jacobi_rotate(m: &mut CMatrix, q: &mut CMatrix, p: usize, c: usize) {
    let n = m.rows();
    let apc = m[(p, c)];
    let r = apc.norm();
    if r == 0.0 {
        return;
    }
    let phase = apc / r;
    let app = m[(p, p)].re;
    let acc = m[(c, c)].re;
    let tau = (acc - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cos = 1.0 / (1.0 + t * t).sqrt();
    let sin = t * cos;
    let w = phase * sin; // complex "sine"

    // Column update: col_p <- cos col_p - conj(w) col_c ; col_c <- w col_p + cos col_c.
    for i in 0..n {
        let a = m[(i, p)];
        let b = m[(i, c)];
        *m.at_mut(i, p) = a * cos - b * w.conj();
        *m.at_mut(i, c) = a * w + b * cos;
    }
    // Row update with the conjugate coefficients (m <- J^H m J).
    for j in 0..n {
        let a = m[(p, j)];
        let b = m[(c, j)];
        *m.at_mut(p, j) = a * cos - b * w;
        *m.at_mut(c, j) = a * w.conj() + b * cos;
    }
    // Clean the rotated pair against roundoff drift.
    *m.at_mut(p, c) = Complex64::new(0.0, 0.0);
    *m.at_mut(c, p) = Complex64::new(0.0, 0.0);
    let dpp = m[(p, p)].re;
    let dcc = m[(c, c)].re;
    *m.at_mut(p, p) = Complex64::new(dpp, 0.0);
    *m.at_mut(c, c) = Complex64::new(dcc, 0.0);

    for i in 0..q.rows() {
        let a = q[(i, p)];
        let b = q[(i, c)];
        *q.at_mut(i, p) = a * cos - b * w.conj();
        *q.at_mut(i, c) = a * w + b * cos;
    }
}
