//! Both sides of the Khintchine-type equivalences: nuclear-norm left-hand
//! sides against weighted square-function infima, the three-term
//! conditioned norm, and the independent-copies certificates.

mod copies;
mod solver;

use thiserror::Error;

use crate::linalg::{nuclear_norm, CMatrix, LinalgError};
use crate::quasifree::{
    modular_conjugate, quasifree_density, CarAlgebra, QuasiFreeError, QuasiFreeSpec,
};

pub use copies::{
    copies_lhs_exact, copies_summands, copies_two_term, rechnen_check, updown_certificate,
    CopiesModel, RechnenItem, RechnenReport, MAX_BASE_DIM, MAX_COPIES,
};
pub use solver::{
    k_norm_three_term, square_function_norm, two_term_infimum, DecompositionResult,
    PartialTraceSpec, SolverOptions,
};

pub const MAX_LHS_GENERATORS: usize = 8;
pub const MAX_LHS_COEFF_DIM: usize = 4;

#[derive(Debug, Error)]
pub enum KhintchineError {
    #[error("solver did not converge after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e}, objective {objective:.6})")]
    NonConvergence {
        primal: f64,
        dual: f64,
        iterations: usize,
        objective: f64,
    },
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    QuasiFree(#[from] QuasiFreeError),
}

/// Which side of a square function a block list feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Column,
    Row,
}

/// Coefficient matrices with their column/row weights.
#[derive(Debug, Clone)]
pub struct KhintchineInstance {
    pub x: Vec<CMatrix>,
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
}

impl KhintchineInstance {
    pub fn new(x: Vec<CMatrix>, lambda: Vec<f64>, nu: Vec<f64>) -> Result<Self, KhintchineError> {
        if x.is_empty() || x.len() != lambda.len() || x.len() != nu.len() {
            return Err(KhintchineError::Shape("instance lengths".into()));
        }
        Ok(KhintchineInstance { x, lambda, nu })
    }

    pub fn infimum(&self, opts: &SolverOptions) -> Result<DecompositionResult, KhintchineError> {
        two_term_infimum(&self.x, &self.lambda, &self.nu, opts)
    }
}

/// Density placement on the CAR side of the equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// W_k = D^{1/2} a_k D^{1/2}; weights (1 - mu_k, mu_k).
    Symmetric,
    /// W_k = a_k D; weights (mu_k, mu_k^2 / (1 - mu_k)).
    Right,
}

impl Normalization {
    pub fn weights(&self, spec: &QuasiFreeSpec) -> (Vec<f64>, Vec<f64>) {
        match self {
            Normalization::Symmetric => (
                spec.mu().iter().map(|m| 1.0 - m).collect(),
                spec.mu().to_vec(),
            ),
            Normalization::Right => (
                spec.mu().to_vec(),
                spec.mu().iter().map(|m| m * m / (1.0 - m)).collect(),
            ),
        }
    }
}

/// || sum_k W_k (x) x_k ||_1 with the density-weighted CAR generators.
pub fn lhs_car_norm(
    xs: &[CMatrix],
    spec: &QuasiFreeSpec,
    normalization: Normalization,
) -> Result<f64, KhintchineError> {
    let k = xs.len();
    if k == 0 || k != spec.len() {
        return Err(KhintchineError::Shape(format!(
            "{k} coefficients vs {} generator weights",
            spec.len()
        )));
    }
    if k > MAX_LHS_GENERATORS {
        return Err(KhintchineError::Precondition(format!(
            "generator count {k} exceeds cap {MAX_LHS_GENERATORS}"
        )));
    }
    let m = xs[0].rows();
    if m > MAX_LHS_COEFF_DIM || xs.iter().any(|x| x.rows() != m || x.cols() != m) {
        return Err(KhintchineError::Precondition(format!(
            "coefficient dimension above cap {MAX_LHS_COEFF_DIM} or inconsistent"
        )));
    }
    let car = CarAlgebra::new(k)?;
    let d = quasifree_density(spec)?;
    let dim = car.dim() * m;
    let mut acc = CMatrix::zeros(dim, dim);
    for (i, x) in xs.iter().enumerate() {
        let w = match normalization {
            Normalization::Symmetric => {
                // D^{1/2} a D^{1/2} = (D^{1/2} a D^{-1/2}) D, an exact diagonal scaling.
                modular_conjugate(spec, car.generator(i + 1), 0.5)?.mul(&d)
            }
            Normalization::Right => car.generator(i + 1).mul(&d),
        };
        acc = acc.add(&w.kron(x)?);
    }
    Ok(nuclear_norm(&acc)?)
}

/// Both sides of the equivalence and their ratio, with the budget
/// [1/200, 200] flagged.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub within_budget: bool,
    pub solver_iterations: usize,
    pub solver_residuals: (f64, f64),
}

pub const RATIO_BUDGET: f64 = 200.0;

/// LHS / RHS for the chosen normalization; the weights come from the
/// quasi-free data, the RHS from the two-term solver.
pub fn khintchine_ratio(
    xs: &[CMatrix],
    spec: &QuasiFreeSpec,
    normalization: Normalization,
    opts: &SolverOptions,
) -> Result<RatioReport, KhintchineError> {
    let lhs = lhs_car_norm(xs, spec, normalization)?;
    let (lambda, nu) = normalization.weights(spec);
    let result = two_term_infimum(xs, &lambda, &nu, opts)?;
    let rhs = result.objective;
    let ratio = if rhs == 0.0 {
        if lhs == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    };
    Ok(RatioReport {
        lhs,
        rhs,
        ratio,
        within_budget: ratio >= 1.0 / RATIO_BUDGET && ratio <= RATIO_BUDGET,
        solver_iterations: result.iterations,
        solver_residuals: (result.primal_residual, result.dual_residual),
    })
}
