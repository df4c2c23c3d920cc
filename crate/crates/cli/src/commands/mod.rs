//! One runner per CLI command. Each returns the per-instance records;
//! instance-level failures become failed records so a run always yields a
//! complete report.

mod clt_cmds;
mod kh_cmds;
mod ops_cmds;
mod quasifree_cmds;

use crate::config::RunConfig;
use crate::report::Record;

pub fn run(cfg: &RunConfig) -> Result<Vec<Record>, String> {
    match cfg.command.as_str() {
        "verify-car" => quasifree_cmds::verify_car(cfg),
        "verify-wick" => quasifree_cmds::verify_wick(cfg),
        "clt-exact" => clt_cmds::clt_exact(cfg),
        "clt-mc" => clt_cmds::clt_mc(cfg),
        "ccr-charfn" => clt_cmds::ccr_charfn(cfg),
        "growth-cert" => clt_cmds::growth_cert(cfg),
        "kh-ratio" => kh_cmds::kh_ratio(cfg),
        "kh-copies" => kh_cmds::kh_copies(cfg),
        "oh-scan" => ops_cmds::oh_scan(cfg),
        "rp-weights" => ops_cmds::rp_weights_cmd(cfg),
        other => Err(format!("unknown command '{other}'")),
    }
}

/// A failed record carrying the error text, so module errors never abort
/// the whole run.
pub(crate) fn error_record(instance_id: usize, label: &str, err: impl std::fmt::Display) -> Record {
    Record::new(instance_id, format!("{label} [error]"))
        .with_inputs(serde_json::json!({ "error": err.to_string() }))
        .pass(false)
}
