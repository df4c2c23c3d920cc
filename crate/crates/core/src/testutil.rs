//! Deterministic random inputs shared by tests, the acceptance suite and
//! the CLI's randomized batteries.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{expm, CMatrix};

/// All randomization goes through this seeded generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a stream seed from a base seed and an index; used so that
/// per-sample work can run in parallel yet reproduce serial results.
pub fn derived_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 over the combined value
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; avoids the rand_distr dependency.
    loop {
        let u: f64 = rng.gen::<f64>();
        if u > 1e-300 {
            let v: f64 = rng.gen::<f64>();
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

/// Complex Ginibre matrix: iid entries (N(0,1) + i N(0,1)) / sqrt(2).
pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(std_normal(rng), std_normal(rng)) / 2.0f64.sqrt()
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = ginibre(rng, n, n);
    g.add(&g.dagger()).scale_re(0.5)
}

/// Haar-like unitary as exp(iH) of a random Hermitian H.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let h = random_hermitian(rng, n);
    expm(&h.scale(Complex64::new(0.0, 1.0))).expect("expm of bounded matrix")
}

/// Random contraction: Ginibre rescaled just inside the unit ball.
pub fn random_contraction(rng: &mut ChaCha8Rng, n: usize, norm_target: f64) -> CMatrix {
    let g = ginibre(rng, n, n);
    let op = crate::linalg::operator_norm(&g).expect("svd of random matrix");
    if op == 0.0 {
        return g;
    }
    g.scale_re(norm_target / op)
}
