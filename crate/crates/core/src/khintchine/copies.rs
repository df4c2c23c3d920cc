//! The finite tensor-product model of independent copies: embeddings
//! alpha_i into the legs of a product state, Clifford reservoir unitaries,
//! the exact Rademacher average, and the contraction / conditional-
//! expectation certificates the two-sided copies inequality rests on.

use num_complex::Complex64;

use crate::climit::{speicher_generators, SignAssignment};
use crate::linalg::{hermitian_operator_norm, nuclear_norm, operator_norm, psd_sqrt, CMatrix};

use super::solver::{two_term_infimum, DecompositionResult, SolverOptions};
use super::KhintchineError;

pub const MAX_COPIES: usize = 3;
pub const MAX_BASE_DIM: usize = 4;

/// n independent copies of a base leg carrying a diagonal state, plus a
/// contraction y driving the certificates. a and b are the defect halves
/// sqrt(1 - y y^*) and sqrt(1 - y^* y).
#[derive(Debug, Clone)]
pub struct CopiesModel {
    n: usize,
    base_dim: usize,
    rho: Vec<f64>,
    y: CMatrix,
    a: CMatrix,
    b: CMatrix,
}

impl CopiesModel {
    pub fn new(n: usize, rho: Vec<f64>, y: CMatrix) -> Result<Self, KhintchineError> {
        if n == 0 || n > MAX_COPIES {
            return Err(KhintchineError::Precondition(format!(
                "copy count {n} outside 1..={MAX_COPIES}"
            )));
        }
        let d = rho.len();
        if d == 0 || d > MAX_BASE_DIM {
            return Err(KhintchineError::Precondition(format!(
                "base dimension {d} outside 1..={MAX_BASE_DIM}"
            )));
        }
        if rho.iter().any(|&p| p <= 0.0) || (rho.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(KhintchineError::BadWeights(
                "base state must be strictly positive with unit trace".into(),
            ));
        }
        if y.rows() != d || y.cols() != d {
            return Err(KhintchineError::Shape(format!(
                "y is {}x{}, base dimension {d}",
                y.rows(),
                y.cols()
            )));
        }
        let op = operator_norm(&y)?;
        if op > 1.0 + 1e-10 {
            return Err(KhintchineError::Precondition(format!(
                "y must be a contraction, got norm {op}"
            )));
        }
        let id = CMatrix::identity(d);
        let a = psd_sqrt(&id.sub(&y.mul(&y.dagger())))?;
        let b = psd_sqrt(&id.sub(&y.dagger().mul(&y)))?;
        Ok(CopiesModel {
            n,
            base_dim: d,
            rho,
            y,
            a,
            b,
        })
    }

    pub fn copies(&self) -> usize {
        self.n
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    /// phi on the base leg.
    fn phi(&self, x: &CMatrix) -> Complex64 {
        (0..self.base_dim).map(|i| x[(i, i)] * self.rho[i]).sum()
    }

    /// phi^{(x) n} on the full leg space.
    fn phi_all(&self, x: &CMatrix) -> Complex64 {
        let dim = self.leg_dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            let mut w = 1.0;
            let mut idx = i;
            for _ in 0..self.n {
                w *= self.rho[idx % self.base_dim];
                idx /= self.base_dim;
            }
            // row-major kron: the last leg is the fastest index either way
            acc += x[(i, i)] * w;
        }
        acc
    }

    fn leg_dim(&self) -> usize {
        self.base_dim.pow(self.n as u32)
    }

    /// alpha_i(x): x on leg i (1-based), identity elsewhere.
    pub fn embed(&self, x: &CMatrix, leg: usize) -> CMatrix {
        let mut acc = CMatrix::identity(1);
        for l in 1..=self.n {
            let f = if l == leg {
                x.clone()
            } else {
                CMatrix::identity(self.base_dim)
            };
            acc = acc.kron(&f).expect("within cap");
        }
        acc
    }

    /// A_i = alpha_1(a) ... alpha_{i-1}(a); the factors commute.
    fn a_prefix(&self, i: usize) -> CMatrix {
        let mut acc = CMatrix::identity(1);
        for l in 1..=self.n {
            let f = if l < i {
                self.a.clone()
            } else {
                CMatrix::identity(self.base_dim)
            };
            acc = acc.kron(&f).expect("within cap");
        }
        acc
    }

    fn b_prefix(&self, i: usize) -> CMatrix {
        let mut acc = CMatrix::identity(1);
        for l in 1..=self.n {
            let f = if l < i {
                self.b.clone()
            } else {
                CMatrix::identity(self.base_dim)
            };
            acc = acc.kron(&f).expect("within cap");
        }
        acc
    }

    /// The L1 element x (x) rho on every other leg, x placed on leg i.
    pub fn embed_l1(&self, x: &CMatrix, leg: usize) -> CMatrix {
        let rho_m = CMatrix::diag_real(&self.rho);
        let mut acc = CMatrix::identity(1);
        for l in 1..=self.n {
            let f = if l == leg { x.clone() } else { rho_m.clone() };
            acc = acc.kron(&f).expect("within cap");
        }
        acc
    }
}

/// Operator norms of sum (A_i Y_i B_i)(A_i Y_i B_i)^* and the starred
/// variant; the telescoping defect identity keeps both at or below one.
pub fn updown_certificate(model: &CopiesModel) -> Result<(f64, f64), KhintchineError> {
    let dim = model.leg_dim();
    let mut s1 = CMatrix::zeros(dim, dim);
    let mut s2 = CMatrix::zeros(dim, dim);
    for i in 1..=model.n {
        let term = model
            .a_prefix(i)
            .mul(&model.embed(&model.y, i))
            .mul(&model.b_prefix(i));
        s1 = s1.add(&term.mul(&term.dagger()));
        s2 = s2.add(&term.dagger().mul(&term));
    }
    Ok((hermitian_operator_norm(&s1)?, hermitian_operator_norm(&s2)?))
}

#[derive(Debug, Clone)]
pub struct RechnenItem {
    pub label: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RechnenReport {
    pub items: Vec<RechnenItem>,
    pub all_pass: bool,
}

/// The conditional-expectation identities behind the copies inequality:
/// i) E factorizes over legs: E(alpha_1(a)...alpha_i(a)) = E(a)^i;
/// ii) ||1 - E(a)|| <= eps/n (same for b);
/// iii) || sum_i (1 - E(a)^{i-1}) || <= e eps n;
/// iv) || sum_i E((1-A_i)(1-A_i)^*) || <= 2 e eps n (and the B variant).
/// The hypothesis ||y||_{K*} <= 1, i.e. E(y^*y) and E(y y^*) both at most
/// eps/n with ||y|| <= 1 and eps < 1/e, is rejected as a precondition
/// failure, never reported as a bound failure.
pub fn rechnen_check(model: &CopiesModel, eps: f64) -> Result<RechnenReport, KhintchineError> {
    let n = model.n as f64;
    if !(eps > 0.0 && eps < std::f64::consts::E.recip()) {
        return Err(KhintchineError::Precondition(format!(
            "need 0 < eps < 1/e, got {eps}"
        )));
    }
    let yy = model.phi(&model.y.mul(&model.y.dagger())).re;
    let y_y = model.phi(&model.y.dagger().mul(&model.y)).re;
    let tol = 1e-12;
    if yy > eps / n + tol || y_y > eps / n + tol {
        return Err(KhintchineError::Precondition(format!(
            "K* hypothesis fails: E(yy*) = {yy}, E(y*y) = {y_y}, eps/n = {}",
            eps / n
        )));
    }

    let mut items = Vec::new();
    let e = std::f64::consts::E;

    // i) tensor factorization, exact up to roundoff.
    let mut worst = 0.0f64;
    for i in 1..=model.n {
        let lhs = model.phi_all(&model.a_prefix(i + 1)).re;
        let rhs = model.phi(&model.a).re.powi(i as i32);
        worst = worst.max((lhs - rhs).abs());
        let lhs_b = model.phi_all(&model.b_prefix(i + 1)).re;
        let rhs_b = model.phi(&model.b).re.powi(i as i32);
        worst = worst.max((lhs_b - rhs_b).abs());
    }
    items.push(RechnenItem {
        label: "i) E(alpha_1(a)..alpha_i(a)) = E(a)^i",
        value: worst,
        bound: 1e-12,
        pass: worst <= 1e-12,
    });

    // ii) defect of the expectation of a.
    let ea = model.phi(&model.a).re;
    let eb = model.phi(&model.b).re;
    let v2 = (1.0 - ea).max(1.0 - eb);
    items.push(RechnenItem {
        label: "ii) 1 - E(a) <= eps/n",
        value: v2,
        bound: eps / n + tol,
        pass: v2 <= eps / n + tol,
    });

    // iii) summed powers.
    let v3a: f64 = (1..=model.n).map(|i| 1.0 - ea.powi(i as i32 - 1)).sum();
    let v3b: f64 = (1..=model.n).map(|i| 1.0 - eb.powi(i as i32 - 1)).sum();
    let v3 = v3a.abs().max(v3b.abs());
    items.push(RechnenItem {
        label: "iii) |sum_i 1 - E(a)^{i-1}| <= e eps n",
        value: v3,
        bound: e * eps * n,
        pass: v3 <= e * eps * n + tol,
    });

    // iv) summed defects of the prefix products.
    let dim = model.leg_dim();
    let id = CMatrix::identity(dim);
    let mut v4a = 0.0;
    let mut v4b = 0.0;
    for i in 1..=model.n {
        let da = id.sub(&model.a_prefix(i));
        v4a += model.phi_all(&da.mul(&da.dagger())).re;
        let db = id.sub(&model.b_prefix(i));
        v4b += model.phi_all(&db.dagger().mul(&db)).re;
    }
    let v4 = v4a.max(v4b);
    items.push(RechnenItem {
        label: "iv) sum_i E((1-A_i)(1-A_i)*) <= 2 e eps n",
        value: v4,
        bound: 2.0 * e * eps * n,
        pass: v4 <= 2.0 * e * eps * n + tol,
    });

    let all_pass = items.iter().all(|i| i.pass);
    Ok(RechnenReport { items, all_pass })
}

/// Clifford reservoir unitaries scaled to unit L1 norm under the
/// normalized trace.
fn reservoir(n: usize) -> Result<Vec<CMatrix>, KhintchineError> {
    let v = speicher_generators(n, &SignAssignment::all_minus(n))
        .map_err(|e| KhintchineError::Precondition(e.to_string()))?;
    let scale = 1.0 / (1u64 << n) as f64;
    Ok(v.into_iter().map(|m| m.scale_re(scale)).collect())
}

/// The summands v_i.tau (x) alpha_i(x) D_n of the copies average, as plain
/// matrices (reservoir density folded in).
pub fn copies_summands(model: &CopiesModel, x: &CMatrix) -> Result<Vec<CMatrix>, KhintchineError> {
    if x.rows() != model.base_dim || x.cols() != model.base_dim {
        return Err(KhintchineError::Shape(format!(
            "x is {}x{}, base dimension {}",
            x.rows(),
            x.cols(),
            model.base_dim
        )));
    }
    let vs = reservoir(model.n)?;
    let mut out = Vec::with_capacity(model.n);
    for i in 1..=model.n {
        out.push(vs[i - 1].kron(&model.embed_l1(x, i))?);
    }
    Ok(out)
}

/// Exact Rademacher average: the mean over all 2^n sign vectors of
/// || sum_i eps_i v_i.tau (x) alpha_i(x) D_n ||_1. Enumerated, never
/// sampled, so downstream comparisons are deterministic.
pub fn copies_lhs_exact(model: &CopiesModel, x: &CMatrix) -> Result<f64, KhintchineError> {
    let summands = copies_summands(model, x)?;
    let n = model.n;
    let mut total = 0.0;
    for mask in 0..(1u32 << n) {
        let mut acc = CMatrix::zeros(summands[0].rows(), summands[0].cols());
        for (i, s) in summands.iter().enumerate() {
            let sign = if (mask >> i) & 1 == 1 { -1.0 } else { 1.0 };
            acc = acc.add(&s.scale_re(sign));
        }
        total += nuclear_norm(&acc)?;
    }
    Ok(total / (1u64 << n) as f64)
}

/// The two-term square-function infimum over splits of the copies
/// summands (unit weights): the middle term of the two-sided inequality.
pub fn copies_two_term(
    model: &CopiesModel,
    x: &CMatrix,
    opts: &SolverOptions,
) -> Result<DecompositionResult, KhintchineError> {
    let summands = copies_summands(model, x)?;
    let ones = vec![1.0; summands.len()];
    two_term_infimum(&summands, &ones, &ones, opts)
}
