//! Run configuration: a TOML tree with a command name, an optional seed,
//! and one parameter table per command. Unknown keys and out-of-cap values
//! are rejected with the offending field named.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum Normalization {
    Symmetric,
    Right,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::Symmetric
    }
}

impl From<Normalization> for ncq_core::khintchine::Normalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Symmetric => ncq_core::khintchine::Normalization::Symmetric,
            Normalization::Right => ncq_core::khintchine::Normalization::Right,
        }
    }
}

/// One table of knobs shared by all commands; each command reads the
/// fields it documents and validation pins the rest to sane ranges.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    // shared instance shape
    pub k: usize,
    pub m: usize,
    pub count: usize,
    pub mu: Vec<f64>,
    pub mu_min: f64,
    pub mu_max: f64,
    pub normalization: Normalization,
    // clt
    pub word: Vec<usize>,
    pub q: f64,
    pub colors: Vec<f64>,
    pub t_scale: f64,
    pub n_values: Vec<usize>,
    pub n: usize,
    pub samples: usize,
    // ccr
    pub z_values: Vec<f64>,
    pub w_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub order: usize,
    pub tolerance: f64,
    // copies
    pub rho: Vec<f64>,
    pub eps: f64,
    // oh / rp
    pub n_max: usize,
    pub p_values: Vec<f64>,
    pub j_min: i64,
    pub j_max: i64,
    pub budget_n: Vec<usize>,
    pub budget_eps: f64,
    // growth certificate
    pub kind: String,
    pub k_max: usize,
    pub moments: Vec<f64>,
    pub expect_feasible: bool,
    pub c_max: f64,
    // kh-ratio mode
    pub mode: String,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: 3,
            m: 2,
            count: 20,
            mu: vec![],
            mu_min: 0.1,
            mu_max: 0.9,
            normalization: Normalization::Symmetric,
            word: vec![],
            q: 0.0,
            colors: vec![],
            t_scale: 1.0,
            n_values: vec![],
            n: 4,
            samples: 10_000,
            z_values: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            w_values: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            mu_values: vec![0.3, 0.5, 0.8],
            order: 16,
            tolerance: 1e-6,
            rho: vec![0.6, 0.4],
            eps: 0.3,
            n_max: 8,
            p_values: vec![1.5, 2.0, 3.0],
            j_min: -4,
            j_max: 4,
            budget_n: vec![8, 16],
            budget_eps: 1.0,
            kind: "gaussian".into(),
            k_max: 20,
            moments: vec![],
            expect_feasible: true,
            c_max: 2.0,
            mode: "random".into(),
        }
    }
}

pub const COMMANDS: &[&str] = &[
    "verify-car",
    "verify-wick",
    "clt-exact",
    "clt-mc",
    "ccr-charfn",
    "kh-ratio",
    "kh-copies",
    "oh-scan",
    "rp-weights",
    "growth-cert",
];

/// Parse and validate a config from TOML text. Every violated constraint
/// is listed; nothing stops at the first problem.
pub fn load_config(text: &str) -> Result<RunConfig, Vec<String>> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| vec![format!("parse error: {e}")])?;
    let mut errors = Vec::new();
    if !COMMANDS.contains(&cfg.command.as_str()) {
        errors.push(format!(
            "unknown command '{}'; expected one of {}",
            cfg.command,
            COMMANDS.join(", ")
        ));
    }
    let p = &cfg.params;
    let stochastic = matches!(cfg.command.as_str(), "clt-mc" | "kh-copies")
        || (cfg.command == "kh-ratio" && p.mode == "random");
    if stochastic && cfg.seed.is_none() {
        errors.push(format!(
            "command '{}' is stochastic: seed is mandatory",
            cfg.command
        ));
    }
    for (field, &value) in [("params.q", &p.q)] {
        if !(-1.0..=1.0).contains(&value) {
            errors.push(format!("{field} = {value} outside [-1, 1]"));
        }
    }
    for (i, &c) in p.colors.iter().enumerate() {
        if !(-1.0..=1.0).contains(&c) {
            errors.push(format!("params.colors[{i}] = {c} outside [-1, 1]"));
        }
    }
    for (i, &mu) in p.mu.iter().enumerate() {
        if !(mu > 0.0 && mu < 1.0) {
            errors.push(format!("params.mu[{i}] = {mu} outside (0, 1)"));
        }
    }
    for (i, &mu) in p.mu_values.iter().enumerate() {
        if !(mu > 0.0 && mu < 1.0) {
            errors.push(format!("params.mu_values[{i}] = {mu} outside (0, 1)"));
        }
    }
    if !(p.mu_min > 0.0 && p.mu_max < 1.0 && p.mu_min <= p.mu_max) {
        errors.push(format!(
            "params.mu_min/mu_max = {}/{} must satisfy 0 < min <= max < 1",
            p.mu_min, p.mu_max
        ));
    }
    match cfg.command.as_str() {
        "verify-car" => {
            if p.k == 0 || p.k > 8 {
                errors.push(format!("params.k = {} outside 1..=8", p.k));
            }
        }
        "verify-wick" => {
            if p.k == 0 || p.k > 3 {
                errors.push(format!(
                    "params.k = {} outside 1..=3 for the dense sweep",
                    p.k
                ));
            }
        }
        "clt-exact" | "clt-mc" => {
            if p.word.is_empty() || p.word.len() > 10 {
                errors.push(format!(
                    "params.word length {} outside 1..=10",
                    p.word.len()
                ));
            }
            if p.word.iter().any(|&w| w > 2) {
                errors.push("params.word letters must be 0 (e12), 1 (e21) or 2 (flip)".into());
            }
            if p.t_scale <= 0.0 {
                errors.push(format!("params.t_scale = {} must be positive", p.t_scale));
            }
            if cfg.command == "clt-mc" {
                if p.n == 0 || p.n > 10 {
                    errors.push(format!("params.n = {} outside 1..=10", p.n));
                }
                if p.samples < 2 {
                    errors.push(format!("params.samples = {} below 2", p.samples));
                }
            } else if p.n_values.is_empty() {
                errors.push("params.n_values must be nonempty".into());
            }
            if p.mu.len() != 1 {
                errors.push("params.mu must hold exactly the base-state value".into());
            }
            if !p.colors.is_empty() && p.colors.len() != p.word.len() {
                errors.push(format!(
                    "params.colors length {} must match the word length {}",
                    p.colors.len(),
                    p.word.len()
                ));
            }
        }
        "ccr-charfn" => {
            if p.order > 24 {
                errors.push(format!("params.order = {} above cap 24", p.order));
            }
            for (name, vals) in [("z_values", &p.z_values), ("w_values", &p.w_values)] {
                for (i, &v) in vals.iter().enumerate() {
                    if v.abs() > 2.0 {
                        errors.push(format!("params.{name}[{i}] = {v} outside [-2, 2]"));
                    }
                }
            }
        }
        "kh-ratio" => {
            if !["random", "scalar-battery"].contains(&p.mode.as_str()) {
                errors.push(format!(
                    "params.mode = '{}' not random|scalar-battery",
                    p.mode
                ));
            }
            if p.k == 0 || p.k > 4 {
                errors.push(format!("params.k = {} outside 1..=4", p.k));
            }
            if p.m == 0 || p.m > 3 {
                errors.push(format!("params.m = {} outside 1..=3", p.m));
            }
        }
        "kh-copies" => {
            if p.n_values.iter().any(|&n| n == 0 || n > 3) {
                errors.push("params.n_values entries must lie in 1..=3".into());
            }
            if p.n_values.is_empty() {
                errors.push("params.n_values must be nonempty".into());
            }
            let sum: f64 = p.rho.iter().sum();
            if p.rho.is_empty() || p.rho.len() > 4 {
                errors.push(format!("params.rho length {} outside 1..=4", p.rho.len()));
            } else if p.rho.iter().any(|&r| r <= 0.0) || (sum - 1.0).abs() > 1e-9 {
                errors.push("params.rho must be strictly positive and sum to 1".into());
            }
            if !(p.eps > 0.0 && p.eps < 1.0 / std::f64::consts::E) {
                errors.push(format!("params.eps = {} outside (0, 1/e)", p.eps));
            }
        }
        "oh-scan" => {
            if p.n_max == 0 || p.n_max > 8 {
                errors.push(format!("params.n_max = {} outside 1..=8", p.n_max));
            }
        }
        "rp-weights" => {
            for (i, &pv) in p.p_values.iter().enumerate() {
                if !(pv > 1.0 && pv.is_finite()) {
                    errors.push(format!("params.p_values[{i}] = {pv} outside (1, inf)"));
                }
            }
            if p.j_min > p.j_max {
                errors.push(format!("params.j_min {} > j_max {}", p.j_min, p.j_max));
            }
            if p.budget_n.iter().any(|&n| n < 2) {
                errors.push("params.budget_n entries must be >= 2".into());
            }
        }
        "growth-cert" => {
            if !["gaussian", "power", "custom"].contains(&p.kind.as_str()) {
                errors.push(format!(
                    "params.kind = '{}' not gaussian|power|custom",
                    p.kind
                ));
            }
            if p.kind == "custom" && p.moments.is_empty() {
                errors.push("params.moments must be supplied for kind = custom".into());
            }
        }
        _ => {}
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}
