//! Speicher's random-sign matrix model: exact and Monte Carlo finite-n
//! moments of u_{n,T}(x) = sqrt(T/n) sum_k v_k (x) pi_k(x), their
//! pair-partition limits, and CCR characteristic-function checks.
//!
//! The sign structure factorizes over tensor legs: the sign variable of the
//! site pair {i, j} lives on leg i of the generator at site j. All exact
//! sums below use that factorization instead of dense matrices, so n can
//! grow far beyond the dense caps. Dense realizations exist only as
//! oracles at small n.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{CMatrix, LinalgError};
use crate::partitions::{
    beta_q, enumerate_pair_partitions, enumerate_partitions, t_mixed, Partition, PartitionError,
};
use crate::quasifree::StateKernel;
use crate::testutil::derived_seed;

pub const MAX_DENSE_SITES: usize = 10;
pub const MAX_EXACT_POINTS: usize = 10;
pub const MAX_LIMIT_POINTS: usize = 12;
pub const MAX_SERIES_ORDER: usize = 24;

#[derive(Debug, Error)]
pub enum ClimitError {
    #[error("site count {got} exceeds cap {cap}")]
    TooManySites { got: usize, cap: usize },
    #[error("word length {got} exceeds cap {cap}")]
    WordTooLong { got: usize, cap: usize },
    #[error("need at least one site")]
    NoSites,
    #[error("word letter {letter} outside the valid range (max {sites})")]
    LetterRange { letter: usize, sites: usize },
    #[error("scaling factor must be positive, got {0}")]
    BadScale(f64),
    #[error("sign mean must lie in [-1,1], got {0}")]
    BadColor(f64),
    #[error("mu = {0} outside the open interval (0,1)")]
    BadMu(f64),
    #[error("series order {got} exceeds cap {cap}")]
    OrderTooLarge { got: usize, cap: usize },
    #[error("|z| and |w| must be at most 2, got {0}")]
    ArgumentTooLarge(f64),
    #[error("instance word/colors length mismatch: word {word}, colors {colors}")]
    LengthMismatch { word: usize, colors: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Symmetric sign assignment s_{ij} in {-1, +1} for site pairs i < j.
#[derive(Debug, Clone, PartialEq)]
pub struct SignAssignment {
    n: usize,
    upper: Vec<f64>,
}

impl SignAssignment {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 1..=n {
            for j in i + 1..=n {
                let s = f(i, j);
                assert!(s == 1.0 || s == -1.0, "signs must be +-1");
                upper.push(s);
            }
        }
        SignAssignment { n, upper }
    }

    /// Clifford case: all signs -1.
    pub fn all_minus(n: usize) -> Self {
        Self::from_fn(n, |_, _| -1.0)
    }

    pub fn all_plus(n: usize) -> Self {
        Self::from_fn(n, |_, _| 1.0)
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i != j && i >= 1 && j >= 1 && i <= self.n && j <= self.n);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let idx = (a - 1) * self.n - (a - 1) * a / 2 + (b - a - 1);
        self.upper[idx]
    }
}

/// A word v_{k_1} ... v_{k_m} in the sign-model generators, 1-based letters.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordWord(pub Vec<usize>);

/// Speicher model: site count, sign mean q = 2p - 1, one realized
/// symmetric sign assignment.
#[derive(Debug, Clone)]
pub struct SpeicherModel {
    pub n: usize,
    pub q: f64,
    pub signs: SignAssignment,
}

impl SpeicherModel {
    /// Draw one sign assignment with P(s_{ij} = 1) = (1 + q)/2.
    pub fn sample(n: usize, q: f64, seed: u64) -> Result<Self, ClimitError> {
        if n == 0 {
            return Err(ClimitError::NoSites);
        }
        if !(-1.0..=1.0).contains(&q) {
            return Err(ClimitError::BadColor(q));
        }
        let mut rng = crate::testutil::rng(seed);
        let signs = SignAssignment::from_fn(n, |_, _| {
            if rng.gen_range(-1.0..1.0) <= q {
                1.0
            } else {
                -1.0
            }
        });
        Ok(SpeicherModel { n, q, signs })
    }

    /// Dense realization of the generators for this assignment.
    pub fn dense_generators(&self) -> Result<Vec<CMatrix>, ClimitError> {
        speicher_generators(self.n, &self.signs)
    }
}

/// Dense realization v_j = v_{1,j} (x) ... (x) v_{j,j} (x) 1 (x) ... (x) 1
/// with v_{j,j} the flip matrix and v_{i,j} = diag(1, s_{ij}) on the legs
/// below it.
pub fn speicher_generators(n: usize, signs: &SignAssignment) -> Result<Vec<CMatrix>, ClimitError> {
    if n == 0 {
        return Err(ClimitError::NoSites);
    }
    if n > MAX_DENSE_SITES {
        return Err(ClimitError::TooManySites {
            got: n,
            cap: MAX_DENSE_SITES,
        });
    }
    assert_eq!(signs.sites(), n);
    let x = flip_matrix();
    let id = CMatrix::identity(2);
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let mut acc = CMatrix::identity(1);
        for leg in 1..=n {
            let factor = if leg < j {
                CMatrix::diag_real(&[1.0, signs.get(leg, j)])
            } else if leg == j {
                x.clone()
            } else {
                id.clone()
            };
            acc = acc.kron(&factor)?;
        }
        out.push(acc);
    }
    Ok(out)
}

fn flip_matrix() -> CMatrix {
    CMatrix::from_rows(vec![
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ])
}

/// Normalized trace factor contributed by a single tensor leg to
/// 2^{-n} tr(v_{k_1} ... v_{k_m}), for concrete signs supplied per
/// (leg, higher site, color). Positions with site == leg flip the leg
/// state; positions with site > leg contribute their sign to whichever
/// basis path currently sits in state 1.
fn leg_trace(
    leg: usize,
    sites: &[usize],
    colors: &[f64],
    sign: &mut impl FnMut(usize, usize, f64) -> f64,
) -> f64 {
    let mut path0 = 1.0f64; // starts in basis state 0
    let mut path1 = 1.0f64; // starts in basis state 1
    let mut state0 = 0u8;
    let mut flips = 0usize;
    for (p, &site) in sites.iter().enumerate() {
        if site == leg {
            state0 ^= 1;
            flips += 1;
        } else if site > leg {
            let s = sign(leg, site, colors[p]);
            if state0 == 1 {
                path0 *= s;
            } else {
                path1 *= s;
            }
        }
    }
    if flips % 2 == 1 {
        return 0.0;
    }
    0.5 * (path0 + path1)
}

/// 2^{-n} tr(v_{k_1} ... v_{k_m}) for one realized sign assignment,
/// reduced leg by leg through v^2 = 1 and the s-commutation rule;
/// values are exactly 0 or +-1.
pub fn word_trace(word: &CliffordWord, signs: &SignAssignment) -> Result<f64, ClimitError> {
    let n = signs.sites();
    for &l in &word.0 {
        if l == 0 || l > n {
            return Err(ClimitError::LetterRange {
                letter: l,
                sites: n,
            });
        }
    }
    let colors = vec![0.0; word.0.len()];
    let mut prod = 1.0;
    for leg in 1..=n {
        prod *= leg_trace(leg, &word.0, &colors, &mut |a, b, _| signs.get(a, b));
        if prod == 0.0 {
            break;
        }
    }
    Ok(prod)
}

/// E[prod_c s^{q_c}(t)] for a single uniform t on [-1,1] against several
/// thresholds: the product is a step function of t flipping sign at every
/// sorted threshold.
fn sign_product_expectation(colors: &[f64]) -> f64 {
    if colors.is_empty() {
        return 1.0;
    }
    if colors.iter().all(|&c| c == colors[0]) {
        // Equal thresholds collapse to a single sign variable.
        return if colors.len() % 2 == 0 {
            1.0
        } else {
            colors[0]
        };
    }
    let mut sorted = colors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    let mut prev = -1.0;
    let mut sign = 1.0;
    for &c in &sorted {
        acc += sign * (c - prev) / 2.0;
        prev = c;
        sign = -sign;
    }
    acc += sign * (1.0 - prev) / 2.0;
    acc
}

/// Expected normalized trace factor of one leg: the same walk as
/// [`leg_trace`], with each site's sign product replaced by its exact
/// expectation (signs on distinct legs and distinct sites are independent).
fn leg_expectation(leg: usize, sites: &[usize], colors: &[f64]) -> f64 {
    let mut state0 = 0u8;
    let mut flips = 0usize;
    // Per higher site, the color multisets seen by the two basis paths.
    let mut seen: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for (p, &site) in sites.iter().enumerate() {
        if site == leg {
            state0 ^= 1;
            flips += 1;
        } else if site > leg {
            let entry = match seen.iter_mut().find(|(s, _, _)| *s == site) {
                Some(e) => e,
                None => {
                    seen.push((site, Vec::new(), Vec::new()));
                    seen.last_mut().unwrap()
                }
            };
            if state0 == 1 {
                entry.1.push(colors[p]);
            } else {
                entry.2.push(colors[p]);
            }
        }
    }
    if flips % 2 == 1 {
        return 0.0;
    }
    let mut e0 = 1.0;
    let mut e1 = 1.0;
    for (_, on0, on1) in &seen {
        e0 *= sign_product_expectation(on0);
        e1 *= sign_product_expectation(on1);
    }
    0.5 * (e0 + e1)
}

/// Exact expectation of [`word_trace`] over i.i.d. signs with mean q:
/// zero when some letter occurs an odd number of times, otherwise the
/// product of one q factor per surviving odd inversion parity.
pub fn word_sign_expectation(word: &CliffordWord, q: f64) -> Result<f64, ClimitError> {
    if !(-1.0..=1.0).contains(&q) {
        return Err(ClimitError::BadColor(q));
    }
    let max_site = word.0.iter().copied().max().unwrap_or(0);
    let colors = vec![q; word.0.len()];
    let mut prod = 1.0;
    for leg in 1..=max_site {
        prod *= leg_expectation(leg, &word.0, &colors);
        if prod == 0.0 {
            break;
        }
    }
    Ok(prod)
}

/// One central-limit instance: base state and symbols, the per-position
/// word, the scaling T, and a sign mean per position. Constant colors
/// recover the single-q model.
#[derive(Debug, Clone)]
pub struct CltInstance {
    state: StateKernel,
    word: Vec<usize>,
    t_scale: f64,
    colors: Vec<f64>,
}

impl CltInstance {
    pub fn new(
        state: StateKernel,
        word: Vec<usize>,
        t_scale: f64,
        colors: Vec<f64>,
    ) -> Result<Self, ClimitError> {
        if t_scale <= 0.0 {
            return Err(ClimitError::BadScale(t_scale));
        }
        if word.len() != colors.len() {
            return Err(ClimitError::LengthMismatch {
                word: word.len(),
                colors: colors.len(),
            });
        }
        for &c in &colors {
            if !(-1.0..=1.0).contains(&c) {
                return Err(ClimitError::BadColor(c));
            }
        }
        for &w in &word {
            if w >= state.symbols() {
                return Err(ClimitError::LetterRange {
                    letter: w,
                    sites: state.symbols(),
                });
            }
        }
        Ok(CltInstance {
            state,
            word,
            t_scale,
            colors,
        })
    }

    pub fn with_scalar_q(
        state: StateKernel,
        word: Vec<usize>,
        t_scale: f64,
        q: f64,
    ) -> Result<Self, ClimitError> {
        let colors = vec![q; word.len()];
        Self::new(state, word, t_scale, colors)
    }

    pub fn word_len(&self) -> usize {
        self.word.len()
    }

    pub fn state(&self) -> &StateKernel {
        &self.state
    }

    fn scalar_color(&self) -> Option<f64> {
        let first = *self.colors.first()?;
        self.colors.iter().all(|&c| c == first).then_some(first)
    }

    /// psi_sigma: product over blocks of the state applied to the ordered
    /// block subword.
    fn psi_sigma(&self, sigma: &Partition) -> Complex64 {
        let mut prod = Complex64::new(1.0, 0.0);
        for block in sigma.blocks() {
            let sub: Vec<usize> = block.iter().map(|&p| self.word[p - 1]).collect();
            prod *= self.state.moment(&sub);
        }
        prod
    }

    fn even_partitions(&self) -> Result<Vec<Partition>, ClimitError> {
        let m = self.word.len();
        if m > MAX_EXACT_POINTS {
            return Err(ClimitError::WordTooLong {
                got: m,
                cap: MAX_EXACT_POINTS,
            });
        }
        Ok(enumerate_partitions(m)?
            .into_iter()
            .filter(|p| p.all_blocks_even())
            .collect())
    }
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn rec(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..r).collect();
    rec(&mut items, 0, &mut out);
    out
}

/// C(n, r) in floating point, valid for any n.
fn binomial(n: usize, r: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..r {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Exact value of tau_n (x) psi^{(x)n} applied to u_{n,T}(x_1)...u_{n,T}(x_m),
/// averaged over the signs. Tuples are grouped by pattern (a set partition
/// with even blocks), relative site order, and the gap lengths between the
/// occupied sites; the per-leg sign expectations are exact, so mixed colors
/// are handled without taking any limit. For constant colors the unoccupied
/// legs contribute exactly 1 and the site sum collapses to a binomial count
/// (times the falling-factorial ordering already in the rank loop).
pub fn finite_n_moment_exact(inst: &CltInstance, n: usize) -> Result<Complex64, ClimitError> {
    if n == 0 {
        return Err(ClimitError::NoSites);
    }
    let m = inst.word.len();
    let scalar = inst.scalar_color().is_some();
    let mut total = Complex64::new(0.0, 0.0);

    for sigma in inst.even_partitions()? {
        let r = sigma.blocks().len();
        if r > n || r == 0 {
            continue;
        }
        let psi = inst.psi_sigma(&sigma);
        if psi.norm() == 0.0 {
            continue;
        }
        for order in permutations(r) {
            // order[s] = block index holding the rank-s (s-th smallest) site.
            let mut rank_of_block = vec![0usize; r];
            for (s, &b) in order.iter().enumerate() {
                rank_of_block[b] = s;
            }
            let ranked: Vec<usize> = (1..=m)
                .map(|p| rank_of_block[sigma.block_of(p)] + 1)
                .collect();

            // Expected trace factor at each occupied leg.
            let mut xfac = 1.0;
            for s in 1..=r {
                xfac *= leg_expectation(s, &ranked, &inst.colors);
                if xfac == 0.0 {
                    break;
                }
            }
            if xfac == 0.0 {
                continue;
            }

            let count = if scalar {
                binomial(n, r)
            } else {
                // An unoccupied leg below the rank-s site sees only the blocks
                // ranked >= s; its factor is (1 + prod of their full-block sign
                // expectations) / 2, constant across its gap.
                let theta: Vec<f64> = (0..r)
                    .map(|b| {
                        let cols: Vec<f64> = sigma.blocks()[b]
                            .iter()
                            .map(|&p| inst.colors[p - 1])
                            .collect();
                        sign_product_expectation(&cols)
                    })
                    .collect();
                let dgap: Vec<f64> = (0..r)
                    .map(|s| {
                        let prod: f64 = (s..r).map(|j| theta[order[j]]).product();
                        0.5 * (1.0 + prod)
                    })
                    .collect();
                gap_sum(&dgap, n - r)
            };
            total += psi * (count * xfac);
        }
    }
    let scale = (inst.t_scale / n as f64).powf(m as f64 / 2.0);
    Ok(total * scale)
}

/// Sum over gap vectors (g_0..g_{r-1} >= 0 with total <= budget) of
/// prod_s d[s]^{g_s}; legs above the top site always contribute 1.
fn gap_sum(d: &[f64], budget: usize) -> f64 {
    let r = d.len();
    let mut dp = vec![1.0f64; budget + 1];
    for s in (0..r).rev() {
        let mut next = vec![0.0f64; budget + 1];
        for (b, slot) in next.iter_mut().enumerate() {
            let mut pw = 1.0;
            let mut acc = 0.0;
            for g in 0..=b {
                acc += pw * dp[b - g];
                pw *= d[s];
            }
            *slot = acc;
        }
        dp = next;
    }
    dp[budget]
}

/// Pair-partition limit: sum over sigma in P2(m) of the partition weight
/// (q^{I(sigma)} for constant colors, t(sigma, q_1..q_m) otherwise, with
/// color-inconsistent partitions contributing zero) times (T psi)_sigma.
pub fn limit_moment(inst: &CltInstance) -> Result<Complex64, ClimitError> {
    let m = inst.word.len();
    if m % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if m > MAX_LIMIT_POINTS {
        return Err(ClimitError::WordTooLong {
            got: m,
            cap: MAX_LIMIT_POINTS,
        });
    }
    if m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let scalar = inst.scalar_color();
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in enumerate_pair_partitions(m)? {
        let weight = match scalar {
            Some(q) => beta_q(&sigma, q),
            None => match t_mixed(&sigma, &inst.colors)? {
                Some(t) => t,
                None => continue,
            },
        };
        if weight == 0.0 {
            continue;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for &(a, b) in sigma.blocks() {
            prod *= inst.state.moment(&[inst.word[a - 1], inst.word[b - 1]]);
        }
        total += prod * weight;
    }
    Ok(total * inst.t_scale.powf(m as f64 / 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of the sign-averaged moment. One coupled uniform
/// variable per site pair drives the thresholds of every color; each
/// sample sums the realized traces over all site tuples. Samples use
/// index-derived seeds and are reduced in index order, so the estimate is
/// identical however the loop is scheduled.
pub fn finite_n_moment_mc(
    inst: &CltInstance,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, ClimitError> {
    if n == 0 {
        return Err(ClimitError::NoSites);
    }
    if n > MAX_DENSE_SITES {
        return Err(ClimitError::TooManySites {
            got: n,
            cap: MAX_DENSE_SITES,
        });
    }
    assert!(
        samples >= 2,
        "need at least two samples for a standard error"
    );
    let m = inst.word.len();
    // psi values and injective site assignments are sign-independent.
    let mut prepared: Vec<(Vec<usize>, Complex64, Vec<Vec<usize>>)> = Vec::new();
    for sigma in inst.even_partitions()? {
        let r = sigma.blocks().len();
        if r > n || r == 0 {
            continue;
        }
        let psi = inst.psi_sigma(&sigma);
        if psi.norm() == 0.0 {
            continue;
        }
        let block_of: Vec<usize> = (1..=m).map(|p| sigma.block_of(p)).collect();
        let mut injections = Vec::new();
        inject_distinct(n, r, &mut vec![0usize; r], 0, &mut injections);
        prepared.push((block_of, psi, injections));
    }
    let scale = (inst.t_scale / n as f64).powf(m as f64 / 2.0);
    let npairs = n * (n - 1) / 2;

    let values: Vec<Complex64> = (0..samples)
        .into_par_iter()
        .map(|idx| {
            let mut rng = crate::testutil::rng(derived_seed(seed, idx as u64));
            let t: Vec<f64> = (0..npairs).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let pair_index = |a: usize, b: usize| -> usize {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                (lo - 1) * n - (lo - 1) * lo / 2 + (hi - lo - 1)
            };
            let mut acc = Complex64::new(0.0, 0.0);
            let mut sites = vec![0usize; m];
            for (block_of, psi, injections) in &prepared {
                let mut sub = 0.0;
                for assign in injections {
                    for p in 0..m {
                        sites[p] = assign[block_of[p]];
                    }
                    let mut tr = 1.0;
                    for leg in 1..=n {
                        tr *= leg_trace(leg, &sites, &inst.colors, &mut |a, b, c| {
                            if t[pair_index(a, b)] <= c {
                                1.0
                            } else {
                                -1.0
                            }
                        });
                        if tr == 0.0 {
                            break;
                        }
                    }
                    sub += tr;
                }
                acc += *psi * sub;
            }
            acc * scale
        })
        .collect();

    let mean = values.iter().sum::<Complex64>() / samples as f64;
    let var: f64 =
        values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (samples as f64 - 1.0);
    let std_err = (var / samples as f64).sqrt();
    Ok(McEstimate {
        mean,
        std_err,
        samples,
    })
}

fn inject_distinct(
    n: usize,
    r: usize,
    current: &mut Vec<usize>,
    depth: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if depth == r {
        out.push(current.clone());
        return;
    }
    for site in 1..=n {
        if current[..depth].contains(&site) {
            continue;
        }
        current[depth] = site;
        inject_distinct(n, r, current, depth + 1, out);
    }
}

/// Exhaustive dense oracle at small n: enumerate the finitely many sign
/// patterns the coupled thresholds can realize (one interval choice per
/// site pair, weighted by its probability), realize the generators as
/// dense matrices, and sum all n^m site tuples. This validates both the
/// representative-pattern grouping and the per-leg factorization.
pub fn finite_n_moment_dense_avg(inst: &CltInstance, n: usize) -> Result<Complex64, ClimitError> {
    if n == 0 {
        return Err(ClimitError::NoSites);
    }
    if n > 3 {
        return Err(ClimitError::TooManySites { got: n, cap: 3 });
    }
    let m = inst.word.len();
    // Interval boundaries: the sorted distinct colors split [-1, 1].
    let mut bounds: Vec<f64> = inst.colors.clone();
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup();
    // (upper boundary, probability); the final interval reaches +1.
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut lo = -1.0;
    for &b in &bounds {
        if b > lo {
            intervals.push((b, (b - lo) / 2.0));
            lo = b;
        }
    }
    if lo < 1.0 {
        intervals.push((f64::INFINITY, (1.0 - lo) / 2.0));
    }
    let npairs = n * (n - 1) / 2;
    let pair_index = |a: usize, b: usize| -> usize {
        let (p, q) = if a < b { (a, b) } else { (b, a) };
        (p - 1) * n - (p - 1) * p / 2 + (q - p - 1)
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut choice = vec![0usize; npairs.max(1)];
    loop {
        let prob: f64 = (0..npairs).map(|k| intervals[choice[k]].1).product();
        if prob > 0.0 {
            // s^{color}(t) = +1 iff t <= color; t sits in the chosen interval,
            // so the sign is +1 exactly when the interval's upper end is at or
            // below the threshold color.
            let sign_of = |k: usize, color: f64| -> f64 {
                let ub = intervals[choice[k]].0;
                if ub.is_finite() && color >= ub {
                    1.0
                } else {
                    -1.0
                }
            };
            // Dense generators per (site, color).
            let mut gens: Vec<((usize, f64), CMatrix)> = Vec::new();
            for site in 1..=n {
                for &color in &inst.colors {
                    if gens.iter().any(|((s, c), _)| *s == site && *c == color) {
                        continue;
                    }
                    let signs = SignAssignment::from_fn(n, |i, j| sign_of(pair_index(i, j), color));
                    let v = speicher_generators(n, &signs)?.swap_remove(site - 1);
                    gens.push(((site, color), v));
                }
            }
            let find = |site: usize, color: f64| -> &CMatrix {
                &gens
                    .iter()
                    .find(|((s, c), _)| *s == site && *c == color)
                    .expect("generator prepared")
                    .1
            };
            let mut tuple_sum = Complex64::new(0.0, 0.0);
            let mut tuple = vec![1usize; m];
            loop {
                let mut prod = CMatrix::identity(1 << n);
                for p in 0..m {
                    prod = prod.mul(find(tuple[p], inst.colors[p]));
                }
                let tr = prod.trace() / (1u64 << n) as f64;
                if tr.norm() > 0.0 {
                    let mut psi = Complex64::new(1.0, 0.0);
                    for site in 1..=n {
                        let sub: Vec<usize> = (0..m)
                            .filter(|&p| tuple[p] == site)
                            .map(|p| inst.word[p])
                            .collect();
                        if !sub.is_empty() {
                            psi *= inst.state.moment(&sub);
                        }
                    }
                    tuple_sum += tr * psi;
                }
                let mut p = 0;
                loop {
                    if p == m {
                        break;
                    }
                    tuple[p] += 1;
                    if tuple[p] <= n {
                        break;
                    }
                    tuple[p] = 1;
                    p += 1;
                }
                if p == m {
                    break;
                }
            }
            total += tuple_sum * prob;
        }
        if npairs == 0 {
            break;
        }
        let mut k = 0;
        loop {
            if k == npairs {
                break;
            }
            choice[k] += 1;
            if choice[k] < intervals.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == npairs {
            break;
        }
    }
    let scale = (inst.t_scale / n as f64).powf(m as f64 / 2.0);
    Ok(total * scale)
}

/// The 2x2 symbols of the CCR check: X the flip matrix, Y its imaginary
/// twin, with the state (1 - mu) x_{11} + mu x_{22}.
pub fn ccr_state_kernel(mu: f64) -> Result<StateKernel, ClimitError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(ClimitError::BadMu(mu));
    }
    let x = flip_matrix();
    let y = CMatrix::from_rows(vec![
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
        vec![Complex64::new(0.0, -1.0), Complex64::new(0.0, 0.0)],
    ]);
    let rho = CMatrix::diag_real(&[1.0 - mu, mu]);
    Ok(StateKernel::new(rho, vec![x, y]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcrSeries {
    pub series: Complex64,
    pub closed_form: Complex64,
    pub truncation_bound: f64,
    pub order: usize,
}

/// Truncated double series sum_{r,s <= order} z^r w^s / (r! s!) phi_1(X^r Y^s)
/// for the Gaussian (q = 1) functional over the kernel psi(X^2) = psi(Y^2) = 1,
/// psi(XY) = i(2 mu - 1) delta_same. The moments obey the two-variable Wick
/// recursion M(r,s) = (r-1) M(r-2,s) + s c M(r-1,s-1), pinned against the
/// explicit pair-partition sum at small orders by the tests. The closed form
/// e^{izw(2 mu - 1) delta} e^{(z^2+w^2)/2} and a tail bound come along.
pub fn ccr_charfn_series(
    mu: f64,
    z: f64,
    w: f64,
    same_index: bool,
    order: usize,
) -> Result<CcrSeries, ClimitError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(ClimitError::BadMu(mu));
    }
    if order > MAX_SERIES_ORDER {
        return Err(ClimitError::OrderTooLarge {
            got: order,
            cap: MAX_SERIES_ORDER,
        });
    }
    for v in [z, w] {
        if v.abs() > 2.0 {
            return Err(ClimitError::ArgumentTooLarge(v));
        }
    }
    let c = if same_index {
        Complex64::new(0.0, 2.0 * mu - 1.0)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let moments = gaussian_xy_moments(c, order);
    let mut factorial = vec![1.0f64; order + 1];
    for k in 1..=order {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    let mut series = Complex64::new(0.0, 0.0);
    for r in 0..=order {
        for s in 0..=order {
            let mom = moments[r][s];
            if mom.norm() == 0.0 {
                continue;
            }
            series += mom * z.powi(r as i32) * w.powi(s as i32) / (factorial[r] * factorial[s]);
        }
    }
    // Tail bound from |phi_1(X^r Y^s)| <= (r+s-1)!! over the next block of
    // omitted terms; computed in logs to dodge overflow.
    let extra = 40usize;
    let mut ln_dfact = vec![0.0f64; 2 * (order + extra) + 2];
    for k in 2..ln_dfact.len() {
        ln_dfact[k] = ln_dfact[k - 2] + (k as f64).ln();
    }
    let mut ln_fact = vec![0.0f64; order + extra + 1];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let (az, aw) = (z.abs().max(1e-12), w.abs().max(1e-12));
    let mut tail = 0.0;
    for r in 0..=order + extra {
        for s in 0..=order + extra {
            if (r <= order && s <= order) || (r + s) % 2 == 1 || r + s == 0 {
                continue;
            }
            let ln_term = (r as f64) * az.ln() + (s as f64) * aw.ln() + ln_dfact[r + s - 1]
                - ln_fact[r]
                - ln_fact[s];
            tail += ln_term.exp();
        }
    }
    let closed = {
        let delta = if same_index { 1.0 } else { 0.0 };
        let phase = Complex64::new(0.0, z * w * (2.0 * mu - 1.0) * delta).exp();
        phase * ((z * z + w * w) / 2.0).exp()
    };
    Ok(CcrSeries {
        series,
        closed_form: closed,
        truncation_bound: tail,
        order,
    })
}

/// phi_1(X^r Y^s) via the pairing recursion: the first letter pairs with
/// one of the other r-1 X's (weight 1) or one of the s Y's (weight c).
fn gaussian_xy_moments(c: Complex64, order: usize) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); order + 1]; order + 1];
    m[0][0] = Complex64::new(1.0, 0.0);
    for s in 2..=order {
        if s % 2 == 0 {
            m[0][s] = m[0][s - 2] * (s - 1) as f64;
        }
    }
    for r in 1..=order {
        for s in 0..=order {
            if (r + s) % 2 == 1 {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            if r >= 2 {
                acc += m[r - 2][s] * (r - 1) as f64;
            }
            if s >= 1 {
                acc += m[r - 1][s - 1] * c * s as f64;
            }
            m[r][s] = acc;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcrCommutator {
    pub moment_diff: Complex64,
    pub expected: Complex64,
    pub residual: f64,
}

/// phi_1(XY) - phi_1(YX) must equal 2i(2 mu - 1), both against the dense
/// 2x2 kernel values and the pair-partition moments.
pub fn ccr_commutator_check(mu: f64) -> Result<CcrCommutator, ClimitError> {
    let state = ccr_state_kernel(mu)?;
    let xy = CltInstance::with_scalar_q(state.clone(), vec![0, 1], 1.0, 1.0)?;
    let yx = CltInstance::with_scalar_q(state, vec![1, 0], 1.0, 1.0)?;
    let diff = limit_moment(&xy)? - limit_moment(&yx)?;
    let expected = Complex64::new(0.0, 2.0 * (2.0 * mu - 1.0));
    Ok(CcrCommutator {
        moment_diff: diff,
        expected,
        residual: (diff - expected).norm(),
    })
}
