//! verify-car and verify-wick: the CAR relation residuals and the
//! pair-partition evaluator against the dense quasi-free trace.

use ncq_core::partitions::beta_q;
use ncq_core::quasifree::{quasifree_density, wick_moment, CarAlgebra, QuasiFreeSpec, StateKernel};
use num_complex::Complex64;

use super::error_record;
use crate::config::RunConfig;
use crate::report::Record;

pub const CAR_TOLERANCE: f64 = 1e-13;
pub const WICK_TOLERANCE: f64 = 1e-10;
pub const WICK_MAX_LEN: usize = 6;

pub fn verify_car(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    let k_max = cfg.params.k;
    let mut records = Vec::new();
    for k in 1..=k_max {
        let rec = match CarAlgebra::new(k) {
            Ok(car) => {
                let residual = car.relation_residual();
                Record::new(k - 1, format!("K={k}"))
                    .with_inputs(serde_json::json!({ "K": k, "dim": car.dim() }))
                    .residual(residual)
                    .pass(residual <= CAR_TOLERANCE)
            }
            Err(e) => error_record(k - 1, &format!("K={k}"), e),
        };
        records.push(rec);
    }
    Ok(records)
}

/// Default quasi-free weights when the config leaves mu empty.
fn default_mu(k: usize) -> Vec<f64> {
    [0.3, 0.55, 0.8][..k].to_vec()
}

pub fn verify_wick(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    let k = cfg.params.k;
    let mu = if cfg.params.mu.is_empty() {
        default_mu(k)
    } else {
        cfg.params.mu.clone()
    };
    if mu.len() != k {
        return Err(format!("need {k} mu values, got {}", mu.len()));
    }
    let spec = QuasiFreeSpec::new(mu.clone()).map_err(|e| e.to_string())?;
    let car = CarAlgebra::new(k).map_err(|e| e.to_string())?;
    let d = quasifree_density(&spec).map_err(|e| e.to_string())?;
    let mut symbols = Vec::new();
    for i in 1..=k {
        symbols.push(car.generator(i).clone());
        symbols.push(car.generator(i).dagger());
    }
    let state = StateKernel::new(d, symbols);
    let kernel = state.pair_kernel();
    let nsym = state.symbols();

    let mut records = Vec::new();
    for len in 1..=WICK_MAX_LEN {
        // Sweep every word of this length, tracking the worst deviation.
        let mut worst = 0.0f64;
        let mut count = 0usize;
        let mut word = vec![0usize; len];
        let mut failed: Option<String> = None;
        'words: loop {
            match wick_moment(&kernel, &word, |s| Complex64::new(beta_q(s, -1.0), 0.0)) {
                Ok(wick) => {
                    let dense = state.moment(&word);
                    worst = worst.max((wick - dense).norm());
                }
                Err(e) => {
                    failed = Some(e.to_string());
                    break 'words;
                }
            }
            count += 1;
            let mut i = 0;
            loop {
                if i == len {
                    break 'words;
                }
                word[i] += 1;
                if word[i] < nsym {
                    break;
                }
                word[i] = 0;
                i += 1;
            }
        }
        let rec = match failed {
            Some(e) => error_record(len - 1, &format!("len={len}"), e),
            None => Record::new(len - 1, format!("len={len}"))
                .with_inputs(serde_json::json!({ "K": k, "mu": mu, "words": count }))
                .residual(worst)
                .pass(worst <= WICK_TOLERANCE),
        };
        records.push(rec);
    }
    Ok(records)
}
