//! `fhsdn`: run an experiment sweep and write the CSV.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use fronthaul_sdn::experiment::{parse_config, run_experiment, workers_from_env, ExperimentSpec};
use fronthaul_sdn::sim::Scheme;

/// Simulate SDN-coordinated and baseline scheduling over an in-band
/// fronthaul and emit one CSV row per (scheme, V, SNR, seed, BS).
///
/// The number of concurrent runs is bounded by SDNFH_WORKERS.
#[derive(Debug, Parser)]
#[command(name = "fhsdn", version)]
struct Args {
    /// TOML experiment file; reference defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the seed list with this single seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Run only this scheme.
    #[arg(long, value_parser = ["sdn", "baseline"])]
    scheme: Option<String>,
}

fn load(args: &Args) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => parse_config(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = args.seed_override {
        spec.sweep.seeds = vec![seed];
    }
    if let Some(s) = &args.scheme {
        spec.sweep.schemes = vec![s.parse::<Scheme>()?];
    }
    spec.validate()?;
    Ok(spec)
}

fn run(args: &Args) -> Result<bool> {
    let spec = load(args)?;
    let workers = workers_from_env()?;
    let output = run_experiment(&spec, workers)?;
    for r in output.results.iter().filter(|r| r.outcome.is_err()) {
        if let Err(e) = &r.outcome {
            eprintln!("run {} failed: {e}", r.point.run_id);
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, &output.csv).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(output.csv.as_bytes())?,
    }
    Ok(output.failures() == 0)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
