//! oh-scan and rp-weights.

use ncq_core::opspaces::{
    choose_lambda, oh_norm, rp_weights, truncation_range, OhInstance, RpSpec,
};
use ncq_core::testutil;
use ncq_core::CMatrix;

use super::error_record;
use crate::config::RunConfig;
use crate::report::Record;

pub const OH_LAW_TOLERANCE: f64 = 1e-10;
pub const OH_INVARIANCE_TOLERANCE: f64 = 1e-9;

pub fn oh_scan(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    let n_max = cfg.params.n_max;
    let mut records = Vec::new();
    let mut id = 0;
    for n in 1..=n_max {
        let x: Vec<CMatrix> = (1..=n).map(|k| CMatrix::unit(n, n, k - 1, 0)).collect();
        let rec = match oh_norm(&OhInstance { x }) {
            Ok(v) => {
                let want = (n as f64).powf(0.25);
                Record::new(id, format!("n^(1/4) law n={n}"))
                    .with_inputs(serde_json::json!({ "n": n }))
                    .lhs(v)
                    .rhs(want)
                    .residual((v - want).abs())
                    .pass((v - want).abs() <= OH_LAW_TOLERANCE)
            }
            Err(e) => error_record(id, &format!("n={n}"), e),
        };
        records.push(rec);
        id += 1;
    }
    // Unitary invariance on a small fixed battery (internal seed keeps the
    // command deterministic without a config seed).
    let mut rng = testutil::rng(7);
    for trial in 0..4 {
        let xs: Vec<CMatrix> = (0..3).map(|_| testutil::ginibre(&mut rng, 2, 2)).collect();
        let u = testutil::random_unitary(&mut rng, 2);
        let v = testutil::random_unitary(&mut rng, 2);
        let moved: Vec<CMatrix> = xs.iter().map(|x| u.mul(x).mul(&v)).collect();
        let rec = match (
            oh_norm(&OhInstance { x: xs }),
            oh_norm(&OhInstance { x: moved }),
        ) {
            (Ok(a), Ok(b)) => {
                let err = (a - b).abs();
                Record::new(id, format!("unitary invariance #{trial}"))
                    .with_inputs(serde_json::json!({ "trial": trial }))
                    .lhs(a)
                    .rhs(b)
                    .residual(err)
                    .pass(err <= OH_INVARIANCE_TOLERANCE * a.max(1.0))
            }
            (Err(e), _) | (_, Err(e)) => error_record(id, "invariance", e),
        };
        records.push(rec);
        id += 1;
    }
    Ok(records)
}

pub fn rp_weights_cmd(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    let p = &cfg.params;
    let mut records = Vec::new();
    let mut id = 0;
    for &pv in &p.p_values {
        let spec = RpSpec {
            p: pv,
            j_min: p.j_min,
            j_max: p.j_max,
        };
        match rp_weights(&spec) {
            Ok(table) => {
                for w in &table {
                    // Pinned identities: sigma_0 = 1/2 always; at p = 2 the
                    // first weights collapse to 1 and 0.
                    let expected = match (w.j, pv == 2.0) {
                        (0, _) => Some(0.5),
                        (1, true) => Some(1.0),
                        (-1, true) => Some(0.0),
                        _ => None,
                    };
                    let in_range = (0.0..=1.0).contains(&w.sigma);
                    let pinned_ok = expected.map_or(true, |e| (w.sigma - e).abs() <= 1e-15);
                    records.push(
                        Record::new(id, format!("p={pv} j={}", w.j))
                            .with_inputs(serde_json::json!({
                                "p": pv, "j": w.j, "embed_coeff": w.embed_coeff,
                            }))
                            .lhs(w.sigma)
                            .rhs(expected.unwrap_or(w.sigma))
                            .pass(in_range && pinned_ok),
                    );
                    id += 1;
                }
            }
            Err(e) => {
                records.push(error_record(id, &format!("p={pv}"), e));
                id += 1;
            }
        }
        // Dimension budget: pick lambda, verify 2^{index} <= n^{eps n}.
        for &n in &p.budget_n {
            let rec = match choose_lambda(pv, n, p.budget_eps) {
                Ok(Some(lambda)) => match truncation_range(pv, n, lambda, p.budget_eps) {
                    Ok(b) => Record::new(id, format!("budget p={pv} n={n}"))
                        .with_inputs(serde_json::json!({
                            "p": pv, "n": n, "eps": p.budget_eps,
                            "lambda": lambda, "j_cap": b.j_cap,
                            "index_size": b.index_size,
                        }))
                        .lhs(b.log2_dim)
                        .rhs(b.log2_budget)
                        .pass(b.within_budget),
                    Err(e) => error_record(id, &format!("budget p={pv} n={n}"), e),
                },
                Ok(None) => Record::new(id, format!("budget p={pv} n={n}"))
                    .with_inputs(serde_json::json!({
                        "p": pv, "n": n, "eps": p.budget_eps, "lambda": null,
                    }))
                    .pass(false),
                Err(e) => error_record(id, &format!("budget p={pv} n={n}"), e),
            };
            records.push(rec);
            id += 1;
        }
    }
    Ok(records)
}
