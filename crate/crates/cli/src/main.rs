//! `telet`: frame design, bounds, baselines and compressed-sensing runs.

mod commands;
mod manifest;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use telet_core::baselines::VariantName;
use telet_core::cs::ExperimentSpec;
use telet_core::{Acceleration, Field, SolverConfig};

use commands::{BaselineJob, BoundsJob, CsJob, DesignJob, Job, TableJob};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "telet", version, about = "Low-coherence frame design")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value = "complex")]
    field: Field,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutArg {
    /// Output directory, created if missing.
    #[arg(long, default_value = "telet_out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Design a low-coherence frame.
    Design {
        #[command(flatten)]
        frame: FrameArgs,
        /// Outer iterations (1e4 for N <= 100, 1e3 beyond).
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, default_value_t = 100)]
        inner_iters: usize,
        /// Inner step-size constant.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Stop once the coherence is this close to the bound.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value = "squarem")]
        accel: Acceleration,
        #[command(flatten)]
        out: OutArg,
    },
    /// Print Welch and composite bounds over a grid.
    Bounds {
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "complex")]
        field: Vec<Field>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run an alternating-projection baseline.
    Baseline {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long, default_value = "tropp")]
        variant: VariantName,
        /// Shrinkage threshold, defaulting to the variant's own.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the synthetic sparse-recovery experiment described by a JSON spec.
    Cs {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Aggregate run summaries into a coherence table.
    Table {
        /// Summary files or directories searched recursively.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Re-run the job recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Defaults to a `replay` directory next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(command: Command) -> Result<(Job, PathBuf)> {
    Ok(match command {
        Command::Design {
            frame,
            max_iters,
            inner_iters,
            eta,
            tol,
            accel,
            out,
        } => {
            let solver = SolverConfig {
                max_outer_iters: max_iters
                    .unwrap_or_else(|| SolverConfig::default_max_iters(frame.n)),
                inner_iters,
                mda_eta: eta,
                stop_tol: tol,
                rng_seed: frame.seed,
                acceleration: accel,
                ..SolverConfig::default()
            };
            solver.validate()?;
            let job = DesignJob {
                d: frame.d,
                n: frame.n,
                field: frame.field,
                seed: frame.seed,
                solver,
            };
            (Job::Design(job), out.out)
        }
        Command::Bounds { d, n, field, out } => (
            Job::Bounds(BoundsJob {
                d,
                n,
                fields: field,
            }),
            out.out,
        ),
        Command::Baseline {
            frame,
            variant,
            eta,
            max_iters,
            out,
        } => {
            let job = BaselineJob {
                d: frame.d,
                n: frame.n,
                field: frame.field,
                seed: frame.seed,
                variant: commands::variant(variant, frame.d, frame.n, eta)?,
                max_iters: max_iters.unwrap_or_else(|| SolverConfig::default_max_iters(frame.n)),
            };
            (Job::Baseline(job), out.out)
        }
        Command::Cs { spec, out } => {
            let parsed = ExperimentSpec::read(&spec)
                .with_context(|| format!("loading spec {}", spec.display()))?;
            (
                Job::Cs(CsJob {
                    spec_path: spec,
                    spec: parsed,
                }),
                out.out,
            )
        }
        Command::Table { inputs, out } => (Job::Table(TableJob { inputs }), out.out),
        Command::Replay { .. } => unreachable!("replay is resolved from its manifest"),
    })
}

/// Write the manifest, run the job, then rewrite the manifest with outputs.
fn execute(job: Job, out: &Path, threads: Option<usize>) -> Result<bool> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = RunManifest::start(job, threads);
    manifest.write(out)?;
    let outcome = manifest.config.run(out)?;
    manifest.finish(outcome.outputs);
    manifest.write(out)?;
    Ok(outcome.ok)
}

fn run(cli: Cli) -> Result<bool> {
    let (job, out, threads) = match cli.command {
        Command::Replay { manifest, out } => {
            let recorded = RunManifest::read(&manifest)?;
            let out =
                out.unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).join("replay"));
            (recorded.config, out, cli.threads.or(recorded.threads))
        }
        command => {
            let (job, out) = resolve(command)?;
            (job, out, cli.threads)
        }
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    execute(job, &out, threads)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TELET_LOG")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: solver stalled before reaching the bound or the iteration cap");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
