//! kh-ratio and kh-copies: the two-sided norm equivalences.

use ncq_core::khintchine::{
    copies_lhs_exact, copies_two_term, k_norm_three_term, khintchine_ratio, rechnen_check,
    updown_certificate, CopiesModel, PartialTraceSpec, SolverOptions,
};
use ncq_core::quasifree::QuasiFreeSpec;
use ncq_core::testutil;
use ncq_core::CMatrix;
use rayon::prelude::*;

use super::error_record;
use crate::config::RunConfig;
use crate::report::Record;

pub const SCALAR_BATTERY_WINDOW: (f64, f64) = (
    std::f64::consts::FRAC_1_SQRT_2 - 0.01,
    std::f64::consts::SQRT_2 + 0.01,
);
pub const UPDOWN_TOLERANCE: f64 = 1e-10;
pub const CHAIN_SLACK: f64 = 1e-6;
pub const COPIES_LOWER_FACTOR: f64 = 40.0;

pub fn kh_ratio(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    let p = &cfg.params;
    let norm: ncq_core::khintchine::Normalization = p.normalization.clone().into();
    let opts = SolverOptions::default();
    match p.mode.as_str() {
        "scalar-battery" => {
            let one = CMatrix::identity(1);
            let mut records = Vec::new();
            for i in 1..=9usize {
                let mu = i as f64 / 10.0;
                let spec = QuasiFreeSpec::new(vec![mu]).map_err(|e| e.to_string())?;
                let rec = match khintchine_ratio(&[one.clone()], &spec, norm, &opts) {
                    Ok(r) => Record::new(i - 1, format!("mu={mu}"))
                        .with_inputs(serde_json::json!({ "mu": mu }))
                        .lhs(r.lhs)
                        .rhs(r.rhs)
                        .ratio(r.ratio)
                        .pass(
                            r.ratio >= SCALAR_BATTERY_WINDOW.0
                                && r.ratio <= SCALAR_BATTERY_WINDOW.1,
                        ),
                    Err(e) => error_record(i - 1, &format!("mu={mu}"), e),
                };
                records.push(rec);
            }
            Ok(records)
        }
        "random" => {
            let seed = cfg.seed.expect("validated");
            let (k_cap, m_cap, count) = (p.k, p.m, p.count);
            let (mu_min, mu_max) = (p.mu_min, p.mu_max);
            let records: Vec<Record> = (0..count)
                .into_par_iter()
                .map(|i| {
                    use rand::Rng;
                    let mut rng = testutil::rng(testutil::derived_seed(seed, i as u64));
                    let k = rng.gen_range(1..=k_cap);
                    let m = rng.gen_range(1..=m_cap);
                    let mu: Vec<f64> = (0..k).map(|_| rng.gen_range(mu_min..mu_max)).collect();
                    let xs: Vec<CMatrix> =
                        (0..k).map(|_| testutil::ginibre(&mut rng, m, m)).collect();
                    let spec = match QuasiFreeSpec::new(mu.clone()) {
                        Ok(s) => s,
                        Err(e) => return error_record(i, "instance", e),
                    };
                    match khintchine_ratio(&xs, &spec, norm, &opts) {
                        Ok(r) => Record::new(i, format!("K={k} m={m}"))
                            .with_inputs(serde_json::json!({ "K": k, "m": m, "mu": mu }))
                            .lhs(r.lhs)
                            .rhs(r.rhs)
                            .ratio(r.ratio)
                            .pass(r.within_budget),
                        Err(e) => error_record(i, &format!("K={k} m={m}"), e),
                    }
                })
                .collect();
            Ok(records)
        }
        other => Err(format!("unknown kh-ratio mode '{other}'")),
    }
}

pub fn kh_copies(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    let p = &cfg.params;
    let seed = cfg.seed.expect("validated");
    let rho = p.rho.clone();
    let d = rho.len();
    let eps = p.eps;
    let opts = SolverOptions::default();

    let mut jobs = Vec::new();
    for &n in &p.n_values {
        for i in 0..p.count {
            jobs.push((n, i));
        }
    }
    let records: Vec<Vec<Record>> = jobs
        .par_iter()
        .enumerate()
        .map(|(job, &(n, i))| {
            use rand::Rng;
            let mut rng = testutil::rng(testutil::derived_seed(seed, (n * 1000 + i) as u64));
            let base = job * 4;
            let mut out = Vec::new();

            // Contraction for the updown certificate.
            let target = rng.gen_range(0.5..0.999);
            let y = testutil::random_contraction(&mut rng, d, target);
            let model = match CopiesModel::new(n, rho.clone(), y) {
                Ok(m) => m,
                Err(e) => return vec![error_record(base, "model", e)],
            };
            match updown_certificate(&model) {
                Ok((s1, s2)) => out.push(
                    Record::new(base, format!("updown n={n} i={i}"))
                        .with_inputs(serde_json::json!({ "n": n }))
                        .lhs(s1)
                        .rhs(s2)
                        .pass(s1 <= 1.0 + UPDOWN_TOLERANCE && s2 <= 1.0 + UPDOWN_TOLERANCE),
                ),
                Err(e) => out.push(error_record(base, "updown", e)),
            }

            // Rescale y into the K* unit ball for the expectation identities.
            let phi = |m: &CMatrix| -> f64 { (0..d).map(|j| m[(j, j)].re * rho[j]).sum() };
            let reach = phi(&model.y().mul(&model.y().dagger()))
                .max(phi(&model.y().dagger().mul(model.y())));
            let scale = ((eps / n as f64) / reach.max(1e-12)).sqrt().min(1.0);
            let y_small = model.y().scale_re(scale);
            let small = match CopiesModel::new(n, rho.clone(), y_small) {
                Ok(m) => m,
                Err(e) => return vec![error_record(base + 1, "model", e)],
            };
            match rechnen_check(&small, eps) {
                Ok(rep) => {
                    let worst = rep
                        .items
                        .iter()
                        .map(|it| it.value - it.bound)
                        .fold(f64::NEG_INFINITY, f64::max);
                    out.push(
                        Record::new(base + 1, format!("rechnen n={n} i={i}"))
                            .with_inputs(serde_json::json!({ "n": n, "eps": eps }))
                            .residual(worst)
                            .pass(rep.all_pass),
                    )
                }
                Err(e) => out.push(error_record(base + 1, "rechnen", e)),
            }

            // Two-sided chain on a random L1 element.
            let z = testutil::ginibre(&mut rng, d, d);
            let x = z.mul(&CMatrix::diag_real(&rho));
            let lhs = match copies_lhs_exact(&model, &x) {
                Ok(v) => v,
                Err(e) => {
                    out.push(error_record(base + 2, "copies-lhs", e));
                    return out;
                }
            };
            let spec = PartialTraceSpec {
                coeff_dim: 1,
                env_dim: d,
                env_state: rho.clone(),
            };
            let k3 = match k_norm_three_term(&x, &spec, n, 1.0, &opts) {
                Ok(r) => r.objective,
                Err(e) => {
                    out.push(error_record(base + 2, "three-term", e));
                    return out;
                }
            };
            let tt = match copies_two_term(&model, &x, &opts) {
                Ok(r) => r.objective,
                Err(e) => {
                    out.push(error_record(base + 3, "two-term", e));
                    return out;
                }
            };
            out.push(
                Record::new(base + 2, format!("chain-upper n={n} i={i}"))
                    .with_inputs(serde_json::json!({ "n": n }))
                    .lhs(lhs)
                    .rhs(k3)
                    .ratio(if k3 > 0.0 { lhs / k3 } else { 1.0 })
                    .pass(lhs <= k3 + CHAIN_SLACK),
            );
            out.push(
                Record::new(base + 3, format!("chain-lower n={n} i={i}"))
                    .with_inputs(serde_json::json!({ "n": n }))
                    .lhs(k3)
                    .rhs(COPIES_LOWER_FACTOR * tt)
                    .ratio(if tt > 0.0 { k3 / tt } else { 1.0 })
                    .pass(k3 <= COPIES_LOWER_FACTOR * tt + CHAIN_SLACK),
            );
            out
        })
        .collect();
    Ok(records.into_iter().flatten().collect())
}
