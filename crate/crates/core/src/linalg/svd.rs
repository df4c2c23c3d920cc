//! Complex SVD via Householder bidiagonalization and implicit-shift QR
//! on the real bidiagonal core. This is the accuracy bottleneck of the
//! whole crate and is deliberately kept in one place.

use num_complex::Complex64;

use super::matrix::{CMatrix, LinalgError, MatrixScratch};

/// Nonincreasing singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        SingularSpectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of singular values (trace norm).
    pub fn nuclear(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest singular value.
    pub fn operator(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Thin SVD `a = u * diag(values) * v^H` with `u: m x k`, `v: n x k`, `k = min(m, n)`.
pub struct Svd {
    pub u: CMatrix,
    pub values: Vec<f64>,
    pub v: CMatrix,
}

const MAX_QR_ITERATIONS_PER_VALUE: usize = 75;

/// Singular values only; skips accumulating the unitary factors.
pub fn svd_values(a: &CMatrix) -> Result<SingularSpectrum, LinalgError> {
    let vals = golub_kahan(a, false)?.0;
    Ok(SingularSpectrum::new(vals))
}

/// Full thin SVD.
pub fn svd(a: &CMatrix) -> Result<Svd, LinalgError> {
    let (vals, u, v) = golub_kahan(a, true)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
    let u = u.unwrap();
    let v = v.unwrap();
    let values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let pick = |m: &CMatrix| CMatrix::from_fn(m.rows(), order.len(), |i, j| m[(i, order[j])]);
    Ok(Svd {
        u: pick(&u),
        values,
        v: pick(&v),
    })
}

pub fn nuclear_norm(a: &CMatrix) -> Result<f64, LinalgError> {
    Ok(svd_values(a)?.nuclear())
}

pub fn operator_norm(a: &CMatrix) -> Result<f64, LinalgError> {
    Ok(svd_values(a)?.operator())
}

/// Singular value soft-thresholding: shrink every singular value by `tau`.
///
/// Strongly rectangular inputs go through the Gram matrix of the short
/// side: with g(l) = (sqrt(l) - tau)_+ / sqrt(l), the shrunk matrix is
/// a * V g(L) V^H, which costs one small eigendecomposition instead of a
/// full SVD. Values below tau are dropped either way, so squaring the
/// spectrum loses nothing that survives.
pub fn soft_threshold(a: &CMatrix, tau: f64) -> Result<CMatrix, LinalgError> {
    let (m, n) = (a.rows(), a.cols());
    if m >= 2 * n || n >= 2 * m {
        return gram_soft_threshold(a, tau);
    }
    let Svd { u, values, v } = svd(a)?;
    let k = values.len();
    let shrunk: Vec<f64> = values.iter().map(|&s| (s - tau).max(0.0)).collect();
    // u * diag(shrunk) * v^H, skipping the zeroed part.
    let mut out = CMatrix::zeros(a.rows(), a.cols());
    for r in 0..k {
        if shrunk[r] == 0.0 {
            continue;
        }
        for i in 0..a.rows() {
            let ui = u[(i, r)] * shrunk[r];
            if ui.re == 0.0 && ui.im == 0.0 {
                continue;
            }
            for j in 0..a.cols() {
                *out.at_mut(i, j) += ui * v[(j, r)].conj();
            }
        }
    }
    Ok(out)
}

fn gram_soft_threshold(a: &CMatrix, tau: f64) -> Result<CMatrix, LinalgError> {
    let tall = a.rows() >= a.cols();
    let gram = if tall {
        a.dagger().mul(a)
    } else {
        a.mul(&a.dagger())
    };
    let (w, q) = super::eig::eigh(&gram)?;
    let k = w.len();
    // shrink factors g(l) on the eigenbasis
    let mut f = vec![0.0f64; k];
    for (i, &l) in w.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        if s > tau {
            f[i] = (s - tau) / s;
        }
    }
    // q * diag(f) * q^H, built from the surviving columns only
    let mut shrink = CMatrix::zeros(k, k);
    for r in 0..k {
        if f[r] == 0.0 {
            continue;
        }
        for i in 0..k {
            let qi = q[(i, r)] * f[r];
            if qi.re == 0.0 && qi.im == 0.0 {
                continue;
            }
            for j in 0..k {
                *shrink.at_mut(i, j) += qi * q[(j, r)].conj();
            }
        }
    }
    Ok(if tall { a.mul(&shrink) } else { shrink.mul(a) })
}

/// Bidiagonalize and iterate. Returns unsorted nonnegative values and,
/// when requested, the corresponding unitary factors.
fn golub_kahan(
    a: &CMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<CMatrix>, Option<CMatrix>), LinalgError> {
    if a.rows() < a.cols() {
        // Work on the adjoint and swap factors.
        let (vals, u, v) = golub_kahan(&a.dagger(), want_vectors)?;
        return Ok((vals, v, u));
    }
    let m = a.rows();
    let n = a.cols();
    if n == 0 {
        return Ok((
            vec![],
            Some(CMatrix::zeros(m, 0)),
            Some(CMatrix::zeros(0, 0)),
        ));
    }

    let mut work = a.clone();
    let mut u = if want_vectors {
        Some(CMatrix::identity(m))
    } else {
        None
    };
    let mut v = if want_vectors {
        Some(CMatrix::identity(n))
    } else {
        None
    };

    // Householder bidiagonalization.
    for k in 0..n {
        house_col(&mut work, k, u.as_mut());
        if k + 2 <= n {
            house_row(&mut work, k, v.as_mut());
        }
    }

    // Extract the complex bidiagonal and realify it by phase scaling.
    let mut d: Vec<Complex64> = (0..n).map(|i| work[(i, i)]).collect();
    let e: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| work[(i, i + 1)]).collect();
    let mut dr = vec![0.0f64; n];
    let mut er = vec![0.0f64; n.saturating_sub(1)];
    for k in 0..n {
        let phi = unit_phase(d[k]);
        dr[k] = d[k].norm();
        if let Some(u) = u.as_mut() {
            scale_col(u, k, phi);
        }
        if k + 1 < n {
            // Row k was scaled by conj(phi); propagate into e_k, then realify e_k
            // by a column scaling compensated in V and d_{k+1}.
            let ek = e[k] * phi.conj();
            let psi = unit_phase(ek);
            er[k] = ek.norm();
            d[k + 1] *= psi.conj();
            if let Some(v) = v.as_mut() {
                scale_col(v, k + 1, psi.conj());
            }
        }
    }

    qr_iterate(&mut dr, &mut er, u.as_mut(), v.as_mut(), m, n)?;

    // Flip negative values.
    for k in 0..n {
        if dr[k] < 0.0 {
            dr[k] = -dr[k];
            if let Some(u) = u.as_mut() {
                scale_col(u, k, Complex64::new(-1.0, 0.0));
            }
        }
    }

    let u = u.map(|full| CMatrix::from_fn(m, n, |i, j| full[(i, j)]));
    Ok((dr, u, v))
}

fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

fn scale_col(m: &mut CMatrix, col: usize, s: Complex64) {
    for i in 0..m.rows() {
        *m.at_mut(i, col) *= s;
    }
}

/// Householder transform clearing column k below the diagonal; accumulated into U.
fn house_col(a: &mut CMatrix, k: usize, mut u: Option<&mut CMatrix>) {
    let m = a.rows();
    let n = a.cols();
    let norm: f64 = (k..m).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let phase = unit_phase(a[(k, k)]);
    // w = x + e^{i arg(x_0)} |x| e_1; H = I - 2 w w^H / |w|^2 maps x to -e^{i arg} |x| e_1.
    let mut w: Vec<Complex64> = (k..m).map(|i| a[(i, k)]).collect();
    w[0] += phase * norm;
    let wnorm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if wnorm2 == 0.0 {
        return;
    }
    let beta = 2.0 / wnorm2;
    // A[k.., k..] <- H A
    for j in k..n {
        let dot: Complex64 = (0..m - k).map(|i| w[i].conj() * a[(k + i, j)]).sum();
        let f = dot * beta;
        for i in 0..m - k {
            *a.at_mut(k + i, j) -= w[i] * f;
        }
    }
    // U <- U H (H is Hermitian).
    if let Some(u) = u.as_mut() {
        for r in 0..m {
            let dot: Complex64 = (0..m - k).map(|i| u[(r, k + i)] * w[i]).sum();
            let f = dot * beta;
            for i in 0..m - k {
                *u.at_mut(r, k + i) -= f * w[i].conj();
            }
        }
    }
}

/// Householder transform clearing row k beyond the superdiagonal; accumulated into V.
fn house_row(a: &mut CMatrix, k: usize, mut v: Option<&mut CMatrix>) {
    let m = a.rows();
    let n = a.cols();
    let start = k + 1;
    let norm: f64 = (start..n).map(|j| a[(k, j)].norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    // Build the Householder from the conjugated row so that (row * G) is real-positive-led.
    let mut w: Vec<Complex64> = (start..n).map(|j| a[(k, j)].conj()).collect();
    let phase = unit_phase(w[0]);
    w[0] += phase * norm;
    let wnorm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if wnorm2 == 0.0 {
        return;
    }
    let beta = 2.0 / wnorm2;
    // A[.., start..] <- A G with G = I - beta w w^H.
    for i in k..m {
        let dot: Complex64 = (0..n - start).map(|j| a[(i, start + j)] * w[j]).sum();
        let f = dot * beta;
        for j in 0..n - start {
            *a.at_mut(i, start + j) -= f * w[j].conj();
        }
    }
    if let Some(v) = v.as_mut() {
        for r in 0..n {
            let dot: Complex64 = (0..n - start).map(|j| v[(r, start + j)] * w[j]).sum();
            let f = dot * beta;
            for j in 0..n - start {
                *v.at_mut(r, start + j) -= f * w[j].conj();
            }
        }
    }
}

/// Implicit-shift QR on the real bidiagonal (d, e), rotations accumulated
/// into the complex factors.
fn qr_iterate(
    d: &mut [f64],
    e: &mut [f64],
    mut u: Option<&mut CMatrix>,
    mut v: Option<&mut CMatrix>,
    _m: usize,
    n: usize,
) -> Result<(), LinalgError> {
    if n <= 1 {
        return Ok(());
    }
    let scale = d
        .iter()
        .map(|x| x.abs())
        .chain(e.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let total_cap = MAX_QR_ITERATIONS_PER_VALUE * n;
    let mut iterations = 0usize;

    let mut hi = n - 1;
    loop {
        // Deflate converged trailing part.
        while hi > 0 {
            let tol = eps * (d[hi - 1].abs() + d[hi].abs()) + eps * scale * 1e-2;
            if e[hi - 1].abs() <= tol {
                e[hi - 1] = 0.0;
                hi -= 1;
            } else {
                break;
            }
        }
        if hi == 0 {
            return Ok(());
        }
        // Find the start of the active block.
        let mut lo = hi;
        while lo > 0 {
            let tol = eps * (d[lo - 1].abs() + d[lo].abs()) + eps * scale * 1e-2;
            if e[lo - 1].abs() <= tol {
                e[lo - 1] = 0.0;
                break;
            }
            lo -= 1;
        }

        iterations += 1;
        if iterations > total_cap {
            return Err(LinalgError::SvdNonConvergence {
                iterations,
                offdiag: e.iter().map(|x| x.abs()).fold(0.0, f64::max),
            });
        }

        // A negligible diagonal inside the block needs explicit annihilation of
        // its superdiagonal neighbour (left rotations pushing it off the end).
        let mut split_done = false;
        for i in lo..hi {
            if d[i].abs() <= eps * scale {
                d[i] = 0.0;
                annihilate_row(d, e, i, hi, u.as_deref_mut());
                split_done = true;
                break;
            }
        }
        if split_done {
            continue;
        }

        golub_kahan_step(d, e, lo, hi, u.as_deref_mut(), v.as_deref_mut());
    }
}

/// Zero out e[i] when d[i] == 0 by rotating row i against rows i+1..=hi.
fn annihilate_row(d: &mut [f64], e: &mut [f64], i: usize, hi: usize, mut u: Option<&mut CMatrix>) {
    let mut f = e[i];
    e[i] = 0.0;
    for j in i + 1..=hi {
        // Givens on rows (i, j) zeroing the bulge f sitting at column j.
        let (c, s, r) = givens(d[j], f);
        d[j] = r;
        if j < hi {
            f = -s * e[j];
            e[j] *= c;
        }
        if let Some(u) = u.as_mut() {
            rotate_cols(u, j, i, c, s);
        }
    }
}

/// One implicit-shift bidiagonal QR step on the block [lo, hi].
fn golub_kahan_step(
    d: &mut [f64],
    e: &mut [f64],
    lo: usize,
    hi: usize,
    mut u: Option<&mut CMatrix>,
    mut v: Option<&mut CMatrix>,
) {
    // Wilkinson shift from the trailing 2x2 of B^T B.
    let dm = d[hi - 1];
    let dn = d[hi];
    let em = e[hi - 1];
    let el = if hi >= 2 { e[hi - 2] } else { 0.0 };
    let t11 = dm * dm + el * el;
    let t12 = dm * em;
    let t22 = dn * dn + em * em;
    let delta = (t11 - t22) / 2.0;
    let mu = if t12 == 0.0 {
        t22
    } else {
        let sgn = if delta >= 0.0 { 1.0 } else { -1.0 };
        t22 - t12 * t12 / (delta + sgn * (delta * delta + t12 * t12).sqrt())
    };

    let mut f = d[lo] * d[lo] - mu;
    let mut g = d[lo] * e[lo];

    for k in lo..hi {
        // Right rotation on columns (k, k+1).
        let (c, s, _r) = givens(f, g);
        if k > lo {
            e[k - 1] = c * f + s * g;
        }
        let dk = d[k];
        let ek = e[k];
        let dk1 = d[k + 1];
        d[k] = c * dk + s * ek;
        e[k] = -s * dk + c * ek;
        let mut bulge = s * dk1;
        d[k + 1] = c * dk1;
        if let Some(v) = v.as_mut() {
            rotate_cols(v, k, k + 1, c, s);
        }

        // Left rotation on rows (k, k+1) restoring bidiagonal form.
        let (c2, s2, r2) = givens(d[k], bulge);
        d[k] = r2;
        let ek_ = e[k];
        let dk1_ = d[k + 1];
        e[k] = c2 * ek_ + s2 * dk1_;
        d[k + 1] = -s2 * ek_ + c2 * dk1_;
        if k + 1 < hi {
            bulge = s2 * e[k + 1];
            e[k + 1] *= c2;
            f = e[k];
            g = bulge;
        }
        if let Some(u) = u.as_mut() {
            rotate_cols(u, k, k + 1, c2, s2);
        }
    }
}

/// (c, s, r) with c*a + s*b = r, -s*a + c*b = 0.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        (1.0, 0.0, a)
    } else if a == 0.0 {
        (0.0, 1.0, b)
    } else {
        let r = a.hypot(b);
        (a / r, b / r, r)
    }
}

/// cols (i, j) <- (c*col_i + s*col_j, -s*col_i + c*col_j), applied to a complex factor.
fn rotate_cols(m: &mut CMatrix, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.rows() {
        let a = m[(r, i)];
        let b = m[(r, j)];
        *m.at_mut(r, i) = a * c + b * s;
        *m.at_mut(r, j) = b * c - a * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    #[test]
    fn identity_values() {
        for m in [1usize, 2, 5, 8] {
            let s = svd_values(&CMatrix::identity(m)).unwrap();
            assert_eq!(s.values().len(), m);
            for &v in s.values() {
                assert!((v - 1.0).abs() <= 1e-14);
            }
            assert!((s.nuclear() - m as f64).abs() <= 1e-12);
        }
    }

    #[test]
    fn rank_one_value() {
        // u v* with |u| = 2, |v| = 3 has the single nonzero value 6.
        let u = [2.0, 0.0, 0.0];
        let v = [0.0, 3.0, 0.0];
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new(u[i] * v[j], 0.0));
        let s = svd_values(&a).unwrap();
        assert!((s.values()[0] - 6.0).abs() <= 1e-12);
        assert!(s.values()[1].abs() <= 1e-12);
        assert!((s.operator() - 6.0).abs() <= 1e-12);
    }

    #[test]
    fn frobenius_identity() {
        let mut rng = testutil::rng(11);
        for _ in 0..20 {
            let a = testutil::ginibre(&mut rng, 3, 3);
            let s = svd_values(&a).unwrap();
            let sumsq: f64 = s.values().iter().map(|v| v * v).sum();
            let frob2 = a.frobenius_norm().powi(2);
            assert!((sumsq - frob2).abs() <= 1e-10 * frob2.max(1.0));
        }
    }

    #[test]
    fn reconstruction_rectangular() {
        let mut rng = testutil::rng(5);
        for (m, n) in [(5, 3), (3, 5), (6, 6), (9, 2), (1, 4)] {
            for _ in 0..6 {
                let a = testutil::ginibre(&mut rng, m, n);
                let f = svd(&a).unwrap();
                let k = m.min(n);
                let mut rec = CMatrix::zeros(m, n);
                for r in 0..k {
                    for i in 0..m {
                        for j in 0..n {
                            *rec.at_mut(i, j) += f.u[(i, r)] * f.values[r] * f.v[(j, r)].conj();
                        }
                    }
                }
                assert!(
                    a.max_abs_diff(&rec) <= 1e-11 * a.max_abs().max(1.0),
                    "reconstruction failed at {}x{}",
                    m,
                    n
                );
                // Factors have orthonormal columns.
                let utu = f.u.dagger().mul(&f.u);
                let vtv = f.v.dagger().mul(&f.v);
                assert!(utu.max_abs_diff(&CMatrix::identity(k)) <= 1e-12);
                assert!(vtv.max_abs_diff(&CMatrix::identity(k)) <= 1e-12);
                // Values are sorted nonincreasing.
                for w in f.values.windows(2) {
                    assert!(w[0] >= w[1] - 1e-14);
                }
            }
        }
    }

    #[test]
    fn nuclear_unitary_invariance() {
        let mut rng = testutil::rng(23);
        for _ in 0..8 {
            let a = testutil::ginibre(&mut rng, 4, 4);
            let u = testutil::random_unitary(&mut rng, 4);
            let v = testutil::random_unitary(&mut rng, 4);
            let n0 = nuclear_norm(&a).unwrap();
            let n1 = nuclear_norm(&u.mul(&a).mul(&v)).unwrap();
            assert!((n0 - n1).abs() <= 1e-10 * n0.max(1.0));
        }
    }

    #[test]
    fn nuclear_triangle_inequality() {
        let mut rng = testutil::rng(31);
        for _ in 0..12 {
            let a = testutil::ginibre(&mut rng, 4, 3);
            let b = testutil::ginibre(&mut rng, 4, 3);
            let na = nuclear_norm(&a).unwrap();
            let nb = nuclear_norm(&b).unwrap();
            let nab = nuclear_norm(&a.add(&b)).unwrap();
            assert!(nab <= na + nb + 1e-10);
        }
    }

    #[test]
    fn soft_threshold_shrinks_values() {
        let mut rng = testutil::rng(41);
        let a = testutil::ginibre(&mut rng, 5, 4);
        let tau = 0.7;
        let t = soft_threshold(&a, tau).unwrap();
        let sa = svd_values(&a).unwrap();
        let st = svd_values(&t).unwrap();
        for (x, y) in sa.values().iter().zip(st.values()) {
            assert!((y - (x - tau).max(0.0)).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_matrix() {
        let z = CMatrix::zeros(4, 3);
        let s = svd_values(&z).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
        assert_eq!(s.nuclear(), 0.0);
    }

    #[test]
    fn graded_spectrum_accuracy() {
        // Singular values spanning ten orders of magnitude survive to
        // near machine relative accuracy.
        let vals = [1e3, 1.0, 1e-3, 1e-7];
        let mut rng = testutil::rng(53);
        let u = testutil::random_unitary(&mut rng, 4);
        let v = testutil::random_unitary(&mut rng, 4);
        let a = u.mul(&CMatrix::diag_real(&vals)).mul(&v.dagger());
        let s = svd_values(&a).unwrap();
        for (got, want) in s.values().iter().zip(vals.iter()) {
            assert!(
                (got - want).abs() <= 1e-12 * 1e3,
                "got {} want {}",
                got,
                want
            );
        }
    }
}
