//! ncq: batch driver for the verification suites. One process runs one
//! command; suites compose via the shell. Exit status is 0 exactly when
//! every recorded check passed.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use config::load_config;
use report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "ncq",
    about = "Numerical checks for pair-partition limits, quasi-free moments and Khintchine-type norm equivalences",
    version
)]
struct Cli {
    /// Command to run; must match the command named in the config file.
    command: String,
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Seed override for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for instance-level parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("ncq: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match load_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("ncq: invalid config:");
            for e in errors {
                eprintln!("  - {e}");
            }
            return ExitCode::from(2);
        }
    };
    if cfg.command != cli.command {
        eprintln!(
            "ncq: command mismatch: CLI says '{}', config says '{}'",
            cli.command, cfg.command
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("ncq: thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let started = Instant::now();
    let records = match commands::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("ncq: {e}");
            return ExitCode::from(2);
        }
    };
    let report = Report::assemble(cfg, records, started.elapsed().as_millis() as u64);
    let body = match cli.format.as_str() {
        "csv" => report.to_csv(),
        _ => report.to_json(),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &body) {
            eprintln!("ncq: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{body}");
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
