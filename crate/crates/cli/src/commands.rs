//! Resolved jobs and their execution.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use telet_core::baselines::{alternating_projection, APVariant, VariantName};
use telet_core::cs::{rows_to_csv, run_synthetic_experiment, ExperimentSpec};
use telet_core::init::DEFAULT_OVERSAMPLE;
use telet_core::io::write_frame;
use telet_core::solver::{ConvergenceTrace, TerminalStatus};
use telet_core::{
    coherence, composite_bound, init_frame, solve, welch_bound, Field, Frame, SolverConfig,
};

use crate::table;

pub const FRAME_FILE: &str = "frame.txt";
pub const TRACE_FILE: &str = "trace.csv";
pub const SIDECAR_FILE: &str = "trace.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const CS_FILE: &str = "results.csv";
pub const TABLE_MD_FILE: &str = "table.md";
pub const TABLE_CSV_FILE: &str = "table.csv";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignJob {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub field: Field,
    pub seed: u64,
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsJob {
    pub d: Vec<usize>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub fields: Vec<Field>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaselineJob {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub field: Field,
    pub seed: u64,
    pub variant: APVariant,
    pub max_iters: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsJob {
    pub spec_path: PathBuf,
    pub spec: ExperimentSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableJob {
    pub inputs: Vec<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Job {
    Design(DesignJob),
    Bounds(BoundsJob),
    Baseline(BaselineJob),
    Cs(CsJob),
    Table(TableJob),
}

/// What a finished job produced.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    /// False when a solver run ended without reaching the bound or the cap.
    pub ok: bool,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Design(_) => "design",
            Job::Bounds(_) => "bounds",
            Job::Baseline(_) => "baseline",
            Job::Cs(_) => "cs",
            Job::Table(_) => "table",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Design(j) => Some(j.seed),
            Job::Baseline(j) => Some(j.seed),
            _ => None,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Job::Cs(j) => vec![j.spec_path.clone()],
            Job::Table(j) => j.inputs.clone(),
            _ => Vec::new(),
        }
    }

    pub fn run(&self, out: &Path) -> Result<Outcome> {
        match self {
            Job::Design(j) => run_design(j, out),
            Job::Bounds(j) => run_bounds(j, out),
            Job::Baseline(j) => run_baseline(j, out),
            Job::Cs(j) => run_cs(j, out),
            Job::Table(j) => table::run(&j.inputs, out),
        }
    }
}

fn bound_for(d: usize, n: usize, field: Field) -> Result<f64> {
    Ok(composite_bound(d, n, field).or_else(|_| welch_bound(d, n))?)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn summary(
    method: &str,
    acceleration: &str,
    seed: u64,
    frame: &Frame,
    trace: &ConvergenceTrace,
) -> Result<serde_json::Value> {
    let (d, n, field) = (frame.d(), frame.n(), frame.field());
    let mu = coherence(frame);
    let mu_cb = bound_for(d, n, field)?;
    Ok(json!({
        "method": method,
        "acceleration": acceleration,
        "field": field,
        "d": d,
        "N": n,
        "seed": seed,
        "mu": mu,
        "mu_cb": mu_cb,
        "welch": welch_bound(d, n)?,
        "gap": mu - mu_cb,
        "iterations": trace.iterations,
        "best_iter": trace.best_iter,
        "status": trace.status.as_str(),
    }))
}

fn write_run<C: Serialize>(
    out: &Path,
    frame: &Frame,
    trace: &ConvergenceTrace,
    config: &C,
    seed: u64,
    summary: &serde_json::Value,
) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = [FRAME_FILE, TRACE_FILE, SIDECAR_FILE, SUMMARY_FILE]
        .iter()
        .map(|f| out.join(f))
        .collect();
    write_frame(frame, &paths[0])?;
    trace.write_csv(&paths[1])?;
    write_json(&paths[2], &trace.sidecar(config, seed)?)?;
    write_json(&paths[3], summary)?;
    Ok(paths)
}

fn run_design(job: &DesignJob, out: &Path) -> Result<Outcome> {
    let frame0 = init_frame(job.d, job.n, job.field, DEFAULT_OVERSAMPLE, job.seed)?;
    let result = solve(&frame0, &job.solver)?;
    let accel = serde_json::to_value(job.solver.acceleration)?;
    let accel = accel.as_str().unwrap_or_default();
    let s = summary("telet", accel, job.seed, &result.frame, &result.trace)?;
    log::info!(
        "design d={} N={} mu={} status={}",
        job.d,
        job.n,
        s["mu"],
        s["status"]
    );
    println!("{}", serde_json::to_string_pretty(&s)?);
    let outputs = write_run(out, &result.frame, &result.trace, &job.solver, job.seed, &s)?;
    Ok(Outcome {
        outputs,
        ok: result.trace.status != TerminalStatus::Stalled,
    })
}

fn run_bounds(job: &BoundsJob, out: &Path) -> Result<Outcome> {
    let mut csv = String::from("d,N,field,welch,composite\n");
    println!(
        "{:>4} {:>6} {:>8} {:>8} {:>8}",
        "d", "N", "field", "welch", "mu_CB"
    );
    for &field in &job.fields {
        for &d in &job.d {
            for &n in &job.n {
                if n < d {
                    bail!("N = {n} is smaller than d = {d}");
                }
                let welch = welch_bound(d, n)?;
                let cb = bound_for(d, n, field)?;
                println!("{d:>4} {n:>6} {:>8} {welch:>8.4} {cb:>8.4}", field.as_str());
                csv.push_str(&format!("{d},{n},{field},{welch:.17e},{cb:.17e}\n"));
            }
        }
    }
    let path = out.join(BOUNDS_FILE);
    std::fs::write(&path, csv)?;
    Ok(Outcome {
        outputs: vec![path],
        ok: true,
    })
}

fn run_baseline(job: &BaselineJob, out: &Path) -> Result<Outcome> {
    let result = alternating_projection(
        job.d,
        job.n,
        job.field,
        &job.variant,
        job.max_iters,
        job.seed,
    )?;
    let s = summary(
        &job.variant.name.to_string(),
        "none",
        job.seed,
        &result.frame,
        &result.trace,
    )?;
    log::info!("baseline {} mu={}", job.variant.name, s["mu"]);
    println!("{}", serde_json::to_string_pretty(&s)?);
    let outputs = write_run(out, &result.frame, &result.trace, job, job.seed, &s)?;
    Ok(Outcome { outputs, ok: true })
}

fn run_cs(job: &CsJob, out: &Path) -> Result<Outcome> {
    let rows = run_synthetic_experiment(&job.spec)?;
    let csv = rows_to_csv(&rows);
    print!("{csv}");
    let path = out.join(CS_FILE);
    std::fs::write(&path, csv)?;
    Ok(Outcome {
        outputs: vec![path],
        ok: true,
    })
}

/// Parse a variant name, defaulting its parameters to the frame size.
pub fn variant(name: VariantName, d: usize, n: usize, eta: Option<f64>) -> Result<APVariant> {
    let v = APVariant::named(name, d, n)?;
    Ok(match eta {
        Some(eta) => APVariant::new(name, eta, v.alpha_rule)?,
        None => v,
    })
}
