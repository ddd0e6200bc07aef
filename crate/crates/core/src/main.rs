use std::path::PathBuf;
use std::process::ExitCode;

use brownian_tandem::config::parse_config;
use brownian_tandem::runner::{output_path, run_with_threads};
use clap::Parser;

/// Runs one configured experiment and writes its CSV table.
#[derive(Debug, Parser)]
#[command(name = "tandem-lab", version)]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; overrides the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replications.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn run(cli: Cli) -> brownian_tandem::Result<bool> {
    let text = std::fs::read_to_string(&cli.config)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = Some(out);
    }
    let result = run_with_threads(&cfg, cli.threads.max(1))?;
    let path = output_path(&cfg);
    result.write_csv(&path)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} rows -> {} ({:.2?})",
        result.rows.len(),
        path.display(),
        result.elapsed
    );
    Ok(!result.invalidated)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: run invalidated");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
