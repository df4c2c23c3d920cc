//! Operator-space norms at a fixed matrix level: the OH norm, quotient
//! norms of R (+) C, the R_p weight sequences and embedding coefficients,
//! and the dimension budget of the matrix-algebra truncation.

use num_complex::Complex64;
use thiserror::Error;

use crate::khintchine::{KhintchineError, KhintchineInstance, SolverOptions};
use crate::linalg::{operator_norm, CMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum OpspaceError {
    #[error("inconsistent coefficient dimensions")]
    Shape,
    #[error("exponent p must lie in (1, infinity), got {0}")]
    BadExponent(f64),
    #[error("need lambda > 1 for the truncation scale, got {0}")]
    BadLambda(f64),
    #[error("need n >= 2, got {0}")]
    BadSize(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Khintchine(#[from] KhintchineError),
}

/// Coefficients of sum_k x_k (x) e_k at one matrix level.
#[derive(Debug, Clone)]
pub struct OhInstance {
    pub x: Vec<CMatrix>,
}

/// || sum_k x_k (x) conj(x_k) ||^{1/2}; conjugation is entrywise in the
/// standard basis.
pub fn oh_norm(inst: &OhInstance) -> Result<f64, OpspaceError> {
    if inst.x.is_empty() {
        return Ok(0.0);
    }
    let m = inst.x[0].rows();
    let mc = inst.x[0].cols();
    if inst.x.iter().any(|x| x.rows() != m || x.cols() != mc) {
        return Err(OpspaceError::Shape);
    }
    let mut acc = CMatrix::zeros(m * m, mc * mc);
    for x in &inst.x {
        acc = acc.add(&x.kron(&x.conj())?);
    }
    Ok(operator_norm(&acc)?.sqrt())
}

/// Norm of sum_k f_k (x) x_k in Q(lambda, nu) (x) L1: the weighted
/// two-term infimum, delegated to the solver.
pub fn quotient_norm(inst: &KhintchineInstance, opts: &SolverOptions) -> Result<f64, OpspaceError> {
    Ok(inst.infimum(opts)?.objective)
}

/// The interpolation-scale data for R_p at one j index.
#[derive(Debug, Clone, PartialEq)]
pub struct RpWeight {
    pub j: i64,
    pub sigma: f64,
    /// Summable embedding coefficient: (1+|j|)^{-p/2} below zero,
    /// (1+|j|)^{-p'/2} from zero up.
    pub embed_coeff: f64,
}

#[derive(Debug, Clone)]
pub struct RpSpec {
    pub p: f64,
    pub j_min: i64,
    pub j_max: i64,
}

/// sigma_j = |j|^{-p'} for j >= 1, 1/2 at j = 0, 1 - |j|^{-p} for j <= -1,
/// with the paired embedding coefficients.
pub fn rp_weights(spec: &RpSpec) -> Result<Vec<RpWeight>, OpspaceError> {
    if !(spec.p > 1.0 && spec.p.is_finite()) {
        return Err(OpspaceError::BadExponent(spec.p));
    }
    let p = spec.p;
    let p_conj = p / (p - 1.0);
    let mut out = Vec::new();
    for j in spec.j_min..=spec.j_max {
        let aj = j.unsigned_abs() as f64;
        let sigma = match j.cmp(&0) {
            std::cmp::Ordering::Greater => aj.powf(-p_conj),
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Less => 1.0 - aj.powf(-p),
        };
        let embed_coeff = if j < 0 {
            (1.0 + aj).powf(-p / 2.0)
        } else {
            (1.0 + aj).powf(-p_conj / 2.0)
        };
        out.push(RpWeight {
            j,
            sigma,
            embed_coeff,
        });
    }
    Ok(out)
}

/// Truncation of the j-range and the matrix-algebra size budget it buys.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationBudget {
    /// |j| <= j_cap survives the truncation.
    pub j_cap: i64,
    /// Cardinality of the index set {1..n} x {|j| <= j_cap}.
    pub index_size: usize,
    /// The budget check 2^{index_size} <= n^{eps n}, kept in logs.
    pub log2_dim: f64,
    pub log2_budget: f64,
    pub within_budget: bool,
}

/// j_cap = ceil(c(p) log n / log lambda) with c(p) = 2 max(p, p'), plus the
/// check that a matrix algebra on the surviving index set fits inside
/// n^{eps n}.
pub fn truncation_range(
    p: f64,
    n: usize,
    lambda: f64,
    eps: f64,
) -> Result<TruncationBudget, OpspaceError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(OpspaceError::BadExponent(p));
    }
    if n < 2 {
        return Err(OpspaceError::BadSize(n));
    }
    if lambda <= 1.0 {
        return Err(OpspaceError::BadLambda(lambda));
    }
    let p_conj = p / (p - 1.0);
    let c_p = 2.0 * p.max(p_conj);
    let j_cap = (c_p * (n as f64).ln() / lambda.ln()).ceil().max(1.0) as i64;
    let index_size = n * (2 * j_cap as usize + 1);
    let log2_dim = index_size as f64;
    let log2_budget = eps * n as f64 * (n as f64).log2();
    Ok(TruncationBudget {
        j_cap,
        index_size,
        log2_dim,
        log2_budget,
        within_budget: log2_dim <= log2_budget,
    })
}

/// Smallest lambda on a doubling scan for which the truncated index set
/// fits the n^{eps n} budget; None when even the j_cap = 1 floor is too
/// large (budget below 3n bits).
pub fn choose_lambda(p: f64, n: usize, eps: f64) -> Result<Option<f64>, OpspaceError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(OpspaceError::BadExponent(p));
    }
    if n < 2 {
        return Err(OpspaceError::BadSize(n));
    }
    let mut lambda = 2.0;
    for _ in 0..64 {
        let b = truncation_range(p, n, lambda, eps)?;
        if b.within_budget {
            return Ok(Some(lambda));
        }
        lambda *= 2.0;
    }
    Ok(None)
}

/// The four candidate terms of the tensor-square functional on a
/// coefficient split b = f + g + h + k: a weighted Hilbert-Schmidt piece,
/// two trace-class pieces, and a second weighted Hilbert-Schmidt piece.
/// The equivalence constant joining them to the tensor norm mixes algebra
/// conventions, so only the values are reported; nothing is asserted.
pub fn four_term_values(
    f: &CMatrix,
    g: &CMatrix,
    h: &CMatrix,
    k: &CMatrix,
    mu: &[f64],
    nu: &[f64],
) -> Result<[f64; 4], OpspaceError> {
    let rows = f.rows();
    let cols = f.cols();
    for m in [g, h, k] {
        if m.rows() != rows || m.cols() != cols {
            return Err(OpspaceError::Shape);
        }
    }
    if mu.len() != rows || nu.len() != cols {
        return Err(OpspaceError::Shape);
    }
    for w in mu.iter().chain(nu) {
        if !(*w > 0.0 && *w < 1.0) {
            return Err(OpspaceError::Shape);
        }
    }
    let mut t1 = 0.0;
    let mut t4 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            t1 += f[(i, j)].norm_sqr() * mu[i] * nu[j];
            t4 += k[(i, j)].norm_sqr() * mu[i] * mu[i] * nu[j] * nu[j]
                / ((1.0 - mu[i]) * (1.0 - nu[j]));
        }
    }
    let weighted = |m: &CMatrix, wf: &dyn Fn(usize, usize) -> f64| {
        CMatrix::from_fn(rows, cols, |i, j| m[(i, j)] * Complex64::new(wf(i, j), 0.0))
    };
    let t2 = crate::linalg::nuclear_norm(&weighted(g, &|i, j| {
        mu[i].sqrt() * nu[j] / (1.0 - nu[j]).sqrt()
    }))?;
    let t3 = crate::linalg::nuclear_norm(&weighted(h, &|i, j| {
        mu[i] * nu[j].sqrt() / (1.0 - mu[i]).sqrt()
    }))?;
    Ok([t1.sqrt(), t2, t3, t4.sqrt()])
}
