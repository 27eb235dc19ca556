//! Experiment files, sweeps and CSV output.
//!
//! A TOML file has three optional tables:
//!
//! ```toml
//! [sim]          # any SimConfig field, e.g. t0 = 5 or num_frames = 500
//! [sweep]
//! v = [0, 50, 100]
//! fronthaul_snr_db = [0, 20]
//! schemes = ["sdn", "baseline"]
//! seeds = [1, 2, 3]
//! [output]
//! trace_dir = "traces"     # one NDJSON slot trace per run
//! rp_dump_dir = "rp"       # last controller program of every SDN run
//! ```
//!
//! Missing tables and fields take the reference defaults; unknown keys are
//! rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibrium::write_debug_dump;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::sim::{run_traced, Metrics, Scheme, SimConfig};

/// Environment variable bounding the number of concurrent runs.
pub const WORKERS_ENV: &str = "SDNFH_WORKERS";

pub const CSV_HEADER: &str = "run_id,scheme,V,fronthaul_snr_db,seed,bs_id,avg_rate_mbps,avg_queue_mbit,delay_proxy_s,sum_rate_mbps,sum_queue_mbit,epsilon_u,rp_objective,no_rec_frame_fraction";

const METRIC_COLUMNS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub v: Vec<f64>,
    pub fronthaul_snr_db: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            v: (0..=10).map(|k| 10.0 * k as f64).collect(),
            fronthaul_snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            schemes: vec![Scheme::Sdn, Scheme::Baseline],
            seeds: vec![1],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub trace_dir: Option<PathBuf>,
    pub rp_dump_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub sim: SimConfig,
    pub sweep: SweepSpec,
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.v.is_empty() || s.fronthaul_snr_db.is_empty() || s.schemes.is_empty() || s.seeds.is_empty() {
            return Err(Error::Config("every sweep axis needs at least one value".into()));
        }
        // Each sweep point must yield a valid run.
        for &v in &s.v {
            for &snr in &s.fronthaul_snr_db {
                SimConfig { v, fronthaul_snr_db: snr, ..self.sim.clone() }.validate()?;
            }
        }
        Ok(())
    }

    /// Runs in output order: scheme, V, fronthaul SNR, seed.
    pub fn runs(&self) -> Vec<RunPoint> {
        let s = &self.sweep;
        let mut out = Vec::new();
        for &scheme in &s.schemes {
            for &v in &s.v {
                for &snr in &s.fronthaul_snr_db {
                    for &seed in &s.seeds {
                        out.push(RunPoint { run_id: out.len(), scheme, v, fronthaul_snr_db: snr, seed });
                    }
                }
            }
        }
        out
    }

    pub fn config_for(&self, p: &RunPoint) -> SimConfig {
        SimConfig { scheme: p.scheme, v: p.v, fronthaul_snr_db: p.fronthaul_snr_db, seed: p.seed, ..self.sim.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPoint {
    pub run_id: usize,
    pub scheme: Scheme,
    pub v: f64,
    pub fronthaul_snr_db: f64,
    pub seed: u64,
}

pub fn parse_config_str(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

/// Nine significant digits, shortest form.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    rounded.to_string()
}

pub struct RunResult {
    pub point: RunPoint,
    pub outcome: std::result::Result<Metrics, String>,
}

pub struct ExperimentOutput {
    pub csv: String,
    pub results: Vec<RunResult>,
}

impl ExperimentOutput {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.outcome.is_err()).count()
    }
}

fn run_point(spec: &ExperimentSpec, p: &RunPoint) -> Result<Metrics> {
    let config = spec.config_for(p);
    let mut trace = match &spec.output.trace_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let f = std::fs::File::create(dir.join(format!("run_{}.ndjson", p.run_id)))?;
            Some(std::io::BufWriter::new(f))
        }
        None => None,
    };
    let out = run_traced(&config, trace.as_mut().map(|w| w as &mut dyn std::io::Write))?;
    if let (Some(dir), Some((inst, sol))) = (&spec.output.rp_dump_dir, &out.last_rp) {
        std::fs::create_dir_all(dir)?;
        write_debug_dump(&dir.join(format!("run_{}.json", p.run_id)), inst, sol)?;
    }
    Ok(out.metrics)
}

/// Run every sweep point on a pool of `workers` threads and render the CSV
/// in spec order.
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentOutput> {
    spec.validate()?;
    let points = spec.runs();
    // The baseline ignores the fronthaul, so without per-run files one run
    // per (V, seed) serves every SNR.
    let share_baseline = spec.output.trace_dir.is_none();
    let owner: Vec<usize> = points
        .iter()
        .map(|p| {
            if share_baseline && p.scheme == Scheme::Baseline {
                points
                    .iter()
                    .position(|q| q.scheme == Scheme::Baseline && q.v == p.v && q.seed == p.seed)
                    .expect("the point itself matches")
            } else {
                p.run_id
            }
        })
        .collect();
    let jobs: Vec<usize> = (0..points.len()).filter(|&i| owner[i] == i).collect();
    let computed = par::with_workers(workers, || {
        par::map(ExecMode::Parallel, &jobs, |&i| run_point(spec, &points[i]).map_err(|e| e.to_string()))
    });
    let mut by_job: Vec<Option<std::result::Result<Metrics, String>>> = vec![None; points.len()];
    for (&i, r) in jobs.iter().zip(computed) {
        by_job[i] = Some(r);
    }
    let results: Vec<RunResult> = points
        .iter()
        .map(|&p| RunResult { point: p, outcome: by_job[owner[p.run_id]].clone().expect("every owner ran") })
        .collect();
    Ok(ExperimentOutput { csv: render_csv(&results), results })
}

pub fn render_csv(results: &[RunResult]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let opt = |x: Option<f64>| x.map_or(String::new(), format_float);
    for r in results {
        let p = &r.point;
        let key = format!(
            "{},{},{},{},{}",
            p.run_id,
            p.scheme.as_str(),
            format_float(p.v),
            format_float(p.fronthaul_snr_db),
            p.seed
        );
        match &r.outcome {
            Ok(m) => {
                for b in 0..m.avg_rate_mbps.len() {
                    let _ = writeln!(
                        out,
                        "{key},{b},{},{},{},{},{},{},{},{}",
                        format_float(m.avg_rate_mbps[b]),
                        format_float(m.avg_queue_mbit[b]),
                        format_float(m.delay_proxy_s[b]),
                        format_float(m.sum_rate_mbps),
                        format_float(m.sum_queue_mbit),
                        opt(m.epsilon_u),
                        opt(m.rp_objective),
                        format_float(m.no_rec_frame_fraction),
                    );
                }
            }
            Err(_) => {
                let _ = writeln!(out, "{key},,{}", ["error"; METRIC_COLUMNS].join(","));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_spec() {
        let spec = parse_config_str("").unwrap();
        assert_eq!(spec, ExperimentSpec::default());
        assert_eq!(spec.sim.t0, 10);
        assert_eq!(spec.sim.arrival_mbps, vec![8.0, 8.0, 5.0, 5.0]);
        assert!((spec.sim.noise_mw - 10f64.powf(-8.5)).abs() < 1e-20);
        assert_eq!(spec.sweep.v.len(), 11);
        assert_eq!(spec.sweep.fronthaul_snr_db, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    }

    #[test]
    fn validation_errors() {
        assert!(parse_config_str("[sweep]\nv = [-1.0]\n").is_err());
        assert!(parse_config_str("[sweep]\nseeds = []\n").is_err());
        assert!(parse_config_str("[sim]\nbogus = 1\n").is_err());
        assert!(parse_config_str("extra = true\n").is_err());
    }

    #[test]
    fn single_override() {
        let spec = parse_config_str("[sim]\nt0 = 5\n").unwrap();
        assert_eq!(spec.sim, SimConfig { t0: 5, ..SimConfig::default() });
    }

    #[test]
    fn row_count_and_header() {
        let text = "[sim]\nnum_frames = 2\n[sweep]\nv = [0, 10, 20]\nfronthaul_snr_db = [20]\nseeds = [1, 2]\n";
        let spec = parse_config_str(text).unwrap();
        let out = run_experiment(&spec, Some(1)).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 24);
        assert!(!out.csv.contains('\r'));
        assert_eq!(out.failures(), 0);
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(50.0), "50");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333");
        assert_eq!(format_float(123456.789012), "123456.789");
    }
}
