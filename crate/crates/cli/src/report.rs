//! Structured run reports: per-instance records with pass flags, a ratio
//! summary, and emission as canonical JSON or flat CSV. Field order is
//! fixed by the struct layout so a re-emitted report is byte-identical.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Record {
    pub instance_id: usize,
    pub label: String,
    pub inputs: serde_json::Value,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub residual: Option<f64>,
    pub pass: bool,
}

impl Record {
    pub fn new(instance_id: usize, label: impl Into<String>) -> Self {
        Record {
            instance_id,
            label: label.into(),
            inputs: serde_json::Value::Null,
            lhs: None,
            rhs: None,
            ratio: None,
            residual: None,
            pass: false,
        }
    }

    pub fn with_inputs(mut self, inputs: serde_json::Value) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn lhs(mut self, v: f64) -> Self {
        self.lhs = Some(v);
        self
    }

    pub fn rhs(mut self, v: f64) -> Self {
        self.rhs = Some(v);
        self
    }

    pub fn ratio(mut self, v: f64) -> Self {
        self.ratio = Some(v);
        self
    }

    pub fn residual(mut self, v: f64) -> Self {
        self.residual = Some(v);
        self
    }

    pub fn pass(mut self, p: bool) -> Self {
        self.pass = p;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub failures: usize,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Versions {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub versions: Versions,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn assemble(config: RunConfig, records: Vec<Record>, wall_time_ms: u64) -> Self {
        let mut ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let summary = Summary {
            count: records.len(),
            failures: records.iter().filter(|r| !r.pass).count(),
            min_ratio: ratios.first().copied(),
            max_ratio: ratios.last().copied(),
            median_ratio: if ratios.is_empty() {
                None
            } else {
                Some(ratios[ratios.len() / 2])
            },
        };
        Report {
            command: config.command.clone(),
            config,
            records,
            summary,
            versions: Versions {
                name: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            wall_time_ms,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failures == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Flat CSV: instance_id, then the record fields in fixed order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance_id,label,inputs,lhs,rhs,ratio,residual,pass\n");
        for r in &self.records {
            let fields = [
                r.instance_id.to_string(),
                csv_escape(&r.label),
                csv_escape(&serde_json::to_string(&r.inputs).expect("inputs serialize")),
                opt(r.lhs),
                opt(r.rhs),
                opt(r.ratio),
                opt(r.residual),
                r.pass.to_string(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config;

    fn sample_report() -> Report {
        let cfg = load_config("command = \"oh-scan\"\n[params]\nn_max = 2\n").unwrap();
        let records = vec![
            Record::new(0, "n=1")
                .with_inputs(serde_json::json!({"n": 1}))
                .lhs(1.0)
                .residual(0.0)
                .pass(true),
            Record::new(1, "n=2")
                .with_inputs(serde_json::json!({"n": 2}))
                .lhs(1.189)
                .residual(1e-12)
                .pass(true),
        ];
        Report::assemble(cfg, records, 5)
    }

    #[test]
    fn json_reparse_is_byte_identical() {
        let report = sample_report();
        let json = report.to_json();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn empty_records_are_a_valid_report() {
        let cfg = load_config("command = \"oh-scan\"\n").unwrap();
        let report = Report::assemble(cfg, vec![], 0);
        assert_eq!(report.summary.count, 0);
        assert!(report.all_pass());
        assert_eq!(
            report.to_csv(),
            "instance_id,label,inputs,lhs,rhs,ratio,residual,pass\n"
        );
    }

    #[test]
    fn csv_header_matches_schema() {
        let csv = sample_report().to_csv();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "instance_id,label,inputs,lhs,rhs,ratio,residual,pass"
        );
        assert_eq!(csv.lines().count(), 3);
        // JSON inputs get quoted.
        assert!(csv.contains("\"{\"\"n\"\":1}\""));
    }
}
