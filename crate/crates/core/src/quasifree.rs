//! Jordan-Wigner CAR matrices, quasi-free state densities, modular
//! scalings, the pair-partition (Wick) moment evaluator and moment-growth
//! certificates.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{CMatrix, LinalgError};
use crate::partitions::{enumerate_pair_partitions, PairPartition, PartitionError};

pub const MAX_GENERATORS: usize = 12;
pub const MAX_WICK_POINTS: usize = 12;

#[derive(Debug, Error)]
pub enum QuasiFreeError {
    #[error("mu[{index}] = {value} is outside the open interval (0,1)")]
    MuOutOfRange { index: usize, value: f64 },
    #[error("empty mu sequence")]
    EmptyMu,
    #[error("generator index {k} outside 1..={count}")]
    GeneratorIndex { k: usize, count: usize },
    #[error("generator count {got} exceeds cap {cap}")]
    TooManyGenerators { got: usize, cap: usize },
    #[error("index sequence must be strictly increasing: {0:?}")]
    NotIncreasing(Vec<usize>),
    #[error("word length {got} exceeds cap {cap}")]
    WordTooLong { got: usize, cap: usize },
    #[error("kernel has no entry for symbol pair ({0}, {1})")]
    MissingKernelEntry(usize, usize),
    #[error("moment list is empty")]
    EmptyMoments,
    #[error("negative even moment m_{index} = {value}; not a moment sequence")]
    NegativeEvenMoment { index: usize, value: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// A finite sequence mu in (0,1)^K fixing the quasi-free state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiFreeSpec {
    mu: Vec<f64>,
}

impl QuasiFreeSpec {
    pub fn new(mu: Vec<f64>) -> Result<Self, QuasiFreeError> {
        if mu.is_empty() {
            return Err(QuasiFreeError::EmptyMu);
        }
        // No clamping: the weight ratios mu/(1-mu) degenerate at the endpoints,
        // so out-of-range values are rejected loudly.
        for (i, &v) in mu.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(QuasiFreeError::MuOutOfRange { index: i, value: v });
            }
        }
        Ok(QuasiFreeSpec { mu })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
}

/// a_k = Z^{(k-1)} (x) e12 (x) I^{(K-k)}: sign string on the lower legs,
/// ladder matrix on leg k. Every other module depends on this choice only
/// through the CAR-relation invariant.
pub fn car_generator(k: usize, count: usize) -> Result<CMatrix, QuasiFreeError> {
    if count == 0 || count > MAX_GENERATORS {
        return Err(QuasiFreeError::TooManyGenerators {
            got: count,
            cap: MAX_GENERATORS,
        });
    }
    if k == 0 || k > count {
        return Err(QuasiFreeError::GeneratorIndex { k, count });
    }
    let z = CMatrix::diag_real(&[1.0, -1.0]);
    let e12 = CMatrix::unit(2, 2, 0, 1);
    let id = CMatrix::identity(2);
    let mut acc = CMatrix::identity(1);
    for leg in 1..=count {
        let factor = if leg < k {
            &z
        } else if leg == k {
            &e12
        } else {
            &id
        };
        acc = acc.kron(factor)?;
    }
    Ok(acc)
}

/// All K generators at once.
#[derive(Debug, Clone)]
pub struct CarAlgebra {
    count: usize,
    generators: Vec<CMatrix>,
}

impl CarAlgebra {
    pub fn new(count: usize) -> Result<Self, QuasiFreeError> {
        let generators = (1..=count)
            .map(|k| car_generator(k, count))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CarAlgebra { count, generators })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        1 << self.count
    }

    pub fn generator(&self, k: usize) -> &CMatrix {
        &self.generators[k - 1]
    }

    /// Largest entrywise residual over all CAR relations:
    /// a_k a_j + a_j a_k = 0 and a_k a_j^* + a_j^* a_k = delta_{kj} I.
    pub fn relation_residual(&self) -> f64 {
        let dim = self.dim();
        let zero = CMatrix::zeros(dim, dim);
        let id = CMatrix::identity(dim);
        let mut worst = 0.0f64;
        for k in 1..=self.count {
            for j in k..=self.count {
                let ak = self.generator(k);
                let aj = self.generator(j);
                let anti = ak.mul(aj).add(&aj.mul(ak));
                worst = worst.max(anti.max_abs_diff(&zero));
                let mixed = ak.mul(&aj.dagger()).add(&aj.dagger().mul(ak));
                let target = if k == j { &id } else { &zero };
                worst = worst.max(mixed.max_abs_diff(target));
            }
        }
        worst
    }
}

/// D_mu = (x)_k diag(1-mu_k, mu_k); trace one, positive definite.
pub fn quasifree_density(spec: &QuasiFreeSpec) -> Result<CMatrix, QuasiFreeError> {
    if spec.len() > MAX_GENERATORS {
        return Err(QuasiFreeError::TooManyGenerators {
            got: spec.len(),
            cap: MAX_GENERATORS,
        });
    }
    let mut acc = CMatrix::identity(1);
    for &mu in spec.mu() {
        acc = acc.kron(&CMatrix::diag_real(&[1.0 - mu, mu]))?;
    }
    Ok(acc)
}

/// Diagonal entries of D_mu, cheaper than materializing the matrix when
/// only scalings are needed.
fn density_diagonal(spec: &QuasiFreeSpec) -> Vec<f64> {
    let k = spec.len();
    let dim = 1usize << k;
    let mut diag = vec![1.0; dim];
    for (leg, &mu) in spec.mu().iter().enumerate() {
        let stride = 1usize << (k - 1 - leg);
        for (idx, d) in diag.iter_mut().enumerate() {
            let bit = (idx / stride) % 2;
            *d *= if bit == 0 { 1.0 - mu } else { mu };
        }
    }
    diag
}

/// D^s x D^{-s} for real s. D_mu is diagonal, so this is an exact
/// entrywise scaling, defined for every real power in finite dimensions.
pub fn modular_conjugate(
    spec: &QuasiFreeSpec,
    x: &CMatrix,
    s: f64,
) -> Result<CMatrix, QuasiFreeError> {
    let diag = density_diagonal(spec);
    if x.rows() != diag.len() || x.cols() != diag.len() {
        return Err(QuasiFreeError::Linalg(LinalgError::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        }));
    }
    Ok(CMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        let scale = (diag[i] / diag[j]).powf(s);
        x[(i, j)] * scale
    }))
}

/// The closed-form quasi-free moment for increasing index tuples:
/// delta_{r,s} prod_l delta_{i_l, j_l} mu_{i_l}.
pub fn car_moment_formula(
    spec: &QuasiFreeSpec,
    i: &[usize],
    j: &[usize],
) -> Result<f64, QuasiFreeError> {
    for seq in [i, j] {
        if !seq.windows(2).all(|w| w[0] < w[1]) {
            return Err(QuasiFreeError::NotIncreasing(seq.to_vec()));
        }
        if let Some(&last) = seq.last() {
            if last > spec.len() || seq[0] == 0 {
                return Err(QuasiFreeError::GeneratorIndex {
                    k: last,
                    count: spec.len(),
                });
            }
        }
    }
    if i.len() != j.len() {
        return Ok(0.0);
    }
    let mut acc = 1.0;
    for (a, b) in i.iter().zip(j) {
        if a != b {
            return Ok(0.0);
        }
        acc *= spec.mu()[a - 1];
    }
    Ok(acc)
}

/// The dense counterpart of [`car_moment_formula`]:
/// tr(D_mu a_{i_r}^* ... a_{i_1}^* a_{j_1} ... a_{j_s}).
pub fn car_moment_dense(
    car: &CarAlgebra,
    spec: &QuasiFreeSpec,
    i: &[usize],
    j: &[usize],
) -> Result<Complex64, QuasiFreeError> {
    let d = quasifree_density(spec)?;
    let mut word = d;
    for &idx in i.iter().rev() {
        word = word.mul(&car.generator(idx).dagger());
    }
    for &idx in j {
        word = word.mul(car.generator(idx));
    }
    Ok(word.trace())
}

/// Pair-moment table psi(x_a x_b) over a finite symbol list, the data the
/// Wick evaluator consumes.
#[derive(Debug, Clone)]
pub struct TwoPointKernel {
    n: usize,
    table: Vec<Complex64>,
}

impl TwoPointKernel {
    pub fn new(n: usize, table: Vec<Complex64>) -> Self {
        assert_eq!(table.len(), n * n, "kernel table must be n x n");
        TwoPointKernel { table, n }
    }

    pub fn symbols(&self) -> usize {
        self.n
    }

    pub fn pair(&self, a: usize, b: usize) -> Result<Complex64, QuasiFreeError> {
        if a >= self.n || b >= self.n {
            return Err(QuasiFreeError::MissingKernelEntry(a, b));
        }
        Ok(self.table[a * self.n + b])
    }
}

/// Concrete symbols with a state: psi(prod) = tr(rho x_{w_1} ... x_{w_k}).
/// Evaluates psi on blocks of any size, which the finite-n sums need;
/// restriction to pairs yields a [`TwoPointKernel`].
#[derive(Debug, Clone)]
pub struct StateKernel {
    rho: CMatrix,
    symbols: Vec<CMatrix>,
}

impl StateKernel {
    pub fn new(rho: CMatrix, symbols: Vec<CMatrix>) -> Self {
        assert!(rho.is_square());
        assert!(symbols
            .iter()
            .all(|s| s.rows() == rho.rows() && s.cols() == rho.cols()));
        StateKernel { rho, symbols }
    }

    pub fn symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, i: usize) -> &CMatrix {
        &self.symbols[i]
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    /// psi of the ordered product of the listed symbols.
    pub fn moment(&self, word: &[usize]) -> Complex64 {
        let mut acc = self.rho.clone();
        for &w in word {
            acc = acc.mul(&self.symbols[w]);
        }
        acc.trace()
    }

    pub fn pair_kernel(&self) -> TwoPointKernel {
        let n = self.symbols.len();
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(self.moment(&[a, b]));
            }
        }
        TwoPointKernel::new(n, table)
    }
}

/// Pair-partition moment: sum over sigma in P2(m) of beta(sigma) times the
/// product over blocks {a,b}, a<b, of psi(x_a x_b). Odd length gives zero.
pub fn wick_moment(
    kernel: &TwoPointKernel,
    word: &[usize],
    mut beta: impl FnMut(&PairPartition) -> Complex64,
) -> Result<Complex64, QuasiFreeError> {
    let m = word.len();
    if m % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if m > MAX_WICK_POINTS {
        return Err(QuasiFreeError::WordTooLong {
            got: m,
            cap: MAX_WICK_POINTS,
        });
    }
    if m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in enumerate_pair_partitions(m)? {
        let mut prod = Complex64::new(1.0, 0.0);
        for &(a, b) in sigma.blocks() {
            prod *= kernel.pair(word[a - 1], word[b - 1])?;
        }
        total += beta(&sigma) * prod;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCheck {
    pub moment_abs: f64,
    pub bound: f64,
    pub holds: bool,
    pub slack: f64,
}

/// |wick moment| <= m^{m/2} prod |x_i| with the supplied length function
/// values. Returns the slack of the inequality.
pub fn growth_bound_check(
    kernel: &TwoPointKernel,
    word: &[usize],
    lengths: &[f64],
    beta: impl FnMut(&PairPartition) -> Complex64,
) -> Result<GrowthCheck, QuasiFreeError> {
    assert_eq!(word.len(), lengths.len(), "one length per word position");
    let m = word.len();
    let moment = wick_moment(kernel, word, beta)?;
    let bound = (m as f64).powf(m as f64 / 2.0) * lengths.iter().product::<f64>();
    let moment_abs = moment.norm();
    Ok(GrowthCheck {
        moment_abs,
        bound,
        holds: moment_abs <= bound + 1e-12,
        slack: bound - moment_abs,
    })
}

/// Smallest grid value c (0.1 steps in (0, 100]) with m_k <= c^{k+1} k^k for
/// every supplied k >= 1, or None when the grid has no feasible point.
pub fn moment_growth_certificate(moments: &[f64]) -> Result<Option<f64>, QuasiFreeError> {
    if moments.is_empty() {
        return Err(QuasiFreeError::EmptyMoments);
    }
    for (idx, &m) in moments.iter().enumerate() {
        let k = idx + 1;
        if k % 2 == 0 && m < 0.0 {
            return Err(QuasiFreeError::NegativeEvenMoment { index: k, value: m });
        }
    }
    'grid: for step in 1..=1000u32 {
        let c = step as f64 / 10.0;
        for (idx, &m) in moments.iter().enumerate() {
            let k = (idx + 1) as f64;
            // Compare in logs to dodge overflow at large k.
            let log_bound = (k + 1.0) * c.ln() + k * k.ln();
            if m > 0.0 && m.ln() > log_bound + 1e-12 {
                continue 'grid;
            }
        }
        return Ok(Some(c));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::beta_q;
    use crate::testutil;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_generator_is_ladder_matrix() {
        let a1 = car_generator(1, 1).unwrap();
        assert_eq!(a1, CMatrix::unit(2, 2, 0, 1));
    }

    #[test]
    fn car_relations_hold_for_small_k() {
        for k in 1..=6 {
            let car = CarAlgebra::new(k).unwrap();
            assert!(car.relation_residual() <= 1e-13, "K={k}");
        }
    }

    #[test]
    fn anticommutator_k2_entrywise() {
        let car = CarAlgebra::new(2).unwrap();
        let (a1, a2) = (car.generator(1), car.generator(2));
        let anti = a1.mul(a2).add(&a2.mul(a1));
        assert!(anti.max_abs_diff(&CMatrix::zeros(4, 4)) == 0.0);
    }

    #[test]
    fn density_is_product_state() {
        let spec = QuasiFreeSpec::new(vec![0.5]).unwrap();
        let d = quasifree_density(&spec).unwrap();
        assert!(d.max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) == 0.0);

        let mut rng = testutil::rng(2);
        use rand::Rng;
        for _ in 0..5 {
            let mu: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..0.99)).collect();
            let spec = QuasiFreeSpec::new(mu).unwrap();
            let d = quasifree_density(&spec).unwrap();
            assert!((d.trace().re - 1.0).abs() <= 1e-13);
            assert!(d.trace().im.abs() <= 1e-15);
        }
    }

    #[test]
    fn mu_outside_open_interval_rejected() {
        assert!(QuasiFreeSpec::new(vec![0.5, 1.0]).is_err());
        assert!(QuasiFreeSpec::new(vec![0.0]).is_err());
        assert!(QuasiFreeSpec::new(vec![1.2]).is_err());
        assert!(QuasiFreeSpec::new(vec![]).is_err());
    }

    #[test]
    fn two_point_trace_matches_mu() {
        let spec = QuasiFreeSpec::new(vec![1.0 / 3.0, 0.25]).unwrap();
        let car = CarAlgebra::new(2).unwrap();
        let d = quasifree_density(&spec).unwrap();
        let a2 = car.generator(2);
        let val = d.mul(&a2.dagger()).mul(a2).trace();
        assert!((val - cx(0.25, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn modular_scaling_of_single_generator() {
        let mu = 0.3;
        let spec = QuasiFreeSpec::new(vec![mu]).unwrap();
        let a1 = car_generator(1, 1).unwrap();
        let scaled = modular_conjugate(&spec, &a1, 0.5).unwrap();
        let want = a1.scale_re(((1.0 - mu) / mu).sqrt());
        assert!(scaled.max_abs_diff(&want) <= 1e-14);
        // s = 0 is the identity map; commuting x passes through.
        let same = modular_conjugate(&spec, &a1, 0.0).unwrap();
        assert!(same.max_abs_diff(&a1) == 0.0);
        let diag = CMatrix::diag_real(&[2.0, -1.0]);
        let through = modular_conjugate(&spec, &diag, 0.77).unwrap();
        assert!(through.max_abs_diff(&diag) <= 1e-15);
    }

    #[test]
    fn moment_formula_examples() {
        let spec = QuasiFreeSpec::new(vec![0.4, 0.7]).unwrap();
        assert_eq!(car_moment_formula(&spec, &[1], &[1]).unwrap(), 0.4);
        assert_eq!(car_moment_formula(&spec, &[1], &[2]).unwrap(), 0.0);
        assert!((car_moment_formula(&spec, &[1, 2], &[1, 2]).unwrap() - 0.28).abs() <= 1e-15);
        assert!(car_moment_formula(&spec, &[2, 1], &[1]).is_err());
    }

    #[test]
    fn moment_formula_matches_dense_trace() {
        // All increasing tuples with r, s <= 2 over K = 3.
        let spec = QuasiFreeSpec::new(vec![0.2, 0.55, 0.9]).unwrap();
        let car = CarAlgebra::new(3).unwrap();
        let tuples: Vec<Vec<usize>> = vec![
            vec![],
            vec![1],
            vec![2],
            vec![3],
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
        ];
        for i in &tuples {
            for j in &tuples {
                let dense = car_moment_dense(&car, &spec, i, j).unwrap();
                let formula = car_moment_formula(&spec, i, j).unwrap();
                assert!(
                    (dense - cx(formula, 0.0)).norm() <= 1e-12,
                    "i={i:?} j={j:?}"
                );
            }
        }
    }

    fn car_symbols_and_kernel(spec: &QuasiFreeSpec) -> (CarAlgebra, StateKernel) {
        let car = CarAlgebra::new(spec.len()).unwrap();
        let d = quasifree_density(spec).unwrap();
        let mut symbols = Vec::new();
        for k in 1..=spec.len() {
            symbols.push(car.generator(k).clone());
            symbols.push(car.generator(k).dagger());
        }
        (car, StateKernel::new(d, symbols))
    }

    #[test]
    fn wick_m2_single_partition() {
        let spec = QuasiFreeSpec::new(vec![0.3]).unwrap();
        let (_, state) = car_symbols_and_kernel(&spec);
        let kernel = state.pair_kernel();
        // word a1^* a1 -> psi(a1^* a1) = mu
        let w = wick_moment(&kernel, &[1, 0], |s| cx(beta_q(s, -1.0), 0.0)).unwrap();
        assert!((w - cx(0.3, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn wick_m4_crossing_weight() {
        // For m = 4 the three pairings contribute psi12 psi34 + psi14 psi23
        // + q psi13 psi24.
        let n = 4;
        let mut rng = testutil::rng(4);
        let g = testutil::ginibre(&mut rng, n, n);
        let rho = {
            let h = g.dagger().mul(&g);
            let t = h.trace().re;
            h.scale_re(1.0 / t)
        };
        let symbols: Vec<CMatrix> = (0..4).map(|_| testutil::ginibre(&mut rng, n, n)).collect();
        let state = StateKernel::new(rho, symbols);
        let kernel = state.pair_kernel();
        let q = 0.37;
        let got = wick_moment(&kernel, &[0, 1, 2, 3], |s| cx(beta_q(s, q), 0.0)).unwrap();
        let p = |a: usize, b: usize| state.moment(&[a, b]);
        let want = p(0, 1) * p(2, 3) + p(0, 3) * p(1, 2) + p(0, 2) * p(1, 3) * q;
        assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
    }

    #[test]
    fn wick_equals_dense_trace_for_car_words() {
        // q = -1 pair evaluator vs the dense trace for all words of length
        // <= 4 over {a_k, a_k^*}, K = 2 (the length-6 sweep runs in the
        // acceptance suite).
        let spec = QuasiFreeSpec::new(vec![0.35, 0.8]).unwrap();
        let (_, state) = car_symbols_and_kernel(&spec);
        let kernel = state.pair_kernel();
        let nsym = state.symbols();
        for len in [2usize, 3, 4] {
            let mut word = vec![0usize; len];
            loop {
                let wick = wick_moment(&kernel, &word, |s| cx(beta_q(s, -1.0), 0.0)).unwrap();
                let dense = state.moment(&word);
                assert!(
                    (wick - dense).norm() <= 1e-12,
                    "word {word:?}: wick {wick} dense {dense}"
                );
                // next word
                let mut i = 0;
                loop {
                    if i == len {
                        break;
                    }
                    word[i] += 1;
                    if word[i] < nsym {
                        break;
                    }
                    word[i] = 0;
                    i += 1;
                }
                if i == len {
                    break;
                }
            }
        }
    }

    #[test]
    fn determinant_formula_for_smeared_generators() {
        // phi(b(g_2)^* b(g_1)^* b(h_1) b(h_2)) = det of the weighted Gram
        // matrix <g_i, h_j>_mu for b(g) = sum_k g_k a_k.
        let spec = QuasiFreeSpec::new(vec![0.3, 0.6, 0.85]).unwrap();
        let car = CarAlgebra::new(3).unwrap();
        let d = quasifree_density(&spec).unwrap();
        let mut rng = testutil::rng(8);
        for _ in 0..10 {
            let vecs: Vec<Vec<Complex64>> = (0..4)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let g = testutil::ginibre(&mut rng, 1, 1);
                            g[(0, 0)]
                        })
                        .collect()
                })
                .collect();
            let smear = |g: &Vec<Complex64>| {
                let mut acc = CMatrix::zeros(8, 8);
                for (k, &c) in g.iter().enumerate() {
                    acc = acc.add(&car.generator(k + 1).scale(c));
                }
                acc
            };
            let (g1, g2, h1, h2) = (&vecs[0], &vecs[1], &vecs[2], &vecs[3]);
            let word = smear(g2)
                .dagger()
                .mul(&smear(g1).dagger())
                .mul(&smear(h1))
                .mul(&smear(h2));
            let dense = d.mul(&word).trace();
            let gram = |g: &Vec<Complex64>, h: &Vec<Complex64>| -> Complex64 {
                g.iter()
                    .zip(h)
                    .zip(spec.mu())
                    .map(|((a, b), &mu)| a.conj() * b * mu)
                    .sum()
            };
            let det = gram(g1, h1) * gram(g2, h2) - gram(g1, h2) * gram(g2, h1);
            assert!((dense - det).norm() <= 1e-9 * det.norm().max(1.0));
        }
    }

    #[test]
    fn sign_absorption_of_weighted_generators() {
        // a_k -> eps_k a_k leaves || sum_k D^{1/2} a_k D^{1/2} (x) x_k ||_1
        // unchanged: the sign unitary commutes with D_mu.
        let spec = QuasiFreeSpec::new(vec![0.25, 0.6]).unwrap();
        let car = CarAlgebra::new(2).unwrap();
        let mut rng = testutil::rng(12);
        let xs: Vec<CMatrix> = (0..2).map(|_| testutil::ginibre(&mut rng, 2, 2)).collect();
        let weighted = |signs: &[f64]| {
            let mut acc = CMatrix::zeros(8, 8);
            for (k, x) in xs.iter().enumerate() {
                let w = modular_conjugate(&spec, car.generator(k + 1), 0.5).unwrap();
                let w = {
                    // D^{1/2} a D^{1/2} = (D^{1/2} a D^{-1/2}) D
                    let d = quasifree_density(&spec).unwrap();
                    w.mul(&d)
                };
                acc = acc.add(&w.kron(x).unwrap().scale_re(signs[k]));
            }
            crate::linalg::nuclear_norm(&acc).unwrap()
        };
        let base = weighted(&[1.0, 1.0]);
        for signs in [[-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]] {
            assert!((weighted(&signs) - base).abs() <= 1e-10 * base.max(1.0));
        }
    }

    #[test]
    fn growth_bound_examples() {
        let spec = QuasiFreeSpec::new(vec![0.4, 0.6]).unwrap();
        let (_, state) = car_symbols_and_kernel(&spec);
        let kernel = state.pair_kernel();
        // m = 2 with unit lengths: bound is 2.
        let chk = growth_bound_check(&kernel, &[0, 1], &[1.0, 1.0], |s| cx(beta_q(s, -1.0), 0.0))
            .unwrap();
        assert!(chk.holds);
        assert!((chk.bound - 2.0).abs() <= 1e-12);
        // CAR word of length 4: positive margin.
        let word = [0usize, 1, 2, 3];
        let lengths: Vec<f64> = word
            .iter()
            .map(|&w| {
                let x = state.symbol(w);
                let op = crate::linalg::operator_norm(x).unwrap();
                let c = state.moment(&[w, w]).norm().sqrt();
                op.max(c)
            })
            .collect();
        let chk =
            growth_bound_check(&kernel, &word, &lengths, |s| cx(beta_q(s, -1.0), 0.0)).unwrap();
        assert!(chk.holds && chk.slack > 0.0);
        // Zero symbols: moment 0.
        let zk = TwoPointKernel::new(1, vec![cx(0.0, 0.0)]);
        let chk = growth_bound_check(&zk, &[0, 0], &[0.0, 0.0], |_| cx(1.0, 0.0)).unwrap();
        assert!(chk.holds && chk.moment_abs == 0.0);
    }

    #[test]
    fn growth_certificate_examples() {
        // All-zero moments: the smallest grid point works.
        let c = moment_growth_certificate(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(c, Some(0.1));
        // Gaussian moments (2k-1)!! are certified by some c <= 2 up to k = 20.
        let mut moments = Vec::new();
        for k in 1..=20usize {
            if k % 2 == 1 {
                moments.push(0.0);
            } else {
                moments.push(crate::partitions::double_factorial(k - 1) as f64);
            }
        }
        let c = moment_growth_certificate(&moments).unwrap().unwrap();
        assert!(c <= 2.0, "got {c}");
        // m_k = k^{2k} outgrows every fixed c on the grid (the constraint
        // k^k <= c^{k+1} forces c >= k^{k/(k+1)}, which crosses 100 near
        // k = 105; the largest entries saturate to infinity and stay
        // infeasible).
        let runaway: Vec<f64> = (1..=110usize)
            .map(|k| (k as f64).powf(2.0 * k as f64))
            .collect();
        assert_eq!(moment_growth_certificate(&runaway).unwrap(), None);
        // Negative even moments are not a moment sequence.
        assert!(moment_growth_certificate(&[1.0, -2.0]).is_err());
    }
}
