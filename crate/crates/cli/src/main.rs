//! `twoview` - benchmark harness for two-view triangulation.
//!
//! Subcommands: `generate` (synthetic dataset), `run` (evaluate methods),
//! `report` (aggregate CSV), `bench` (kernel throughput). Exit codes:
//! 0 success, 2 bad flags, 3 IO error, 4 unknown method.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twoview_cli::aggregate::{aggregate, write_report, Binning};
use twoview_cli::dataset::{generate_parallel, read_problems, write_problems};
use twoview_cli::records::{read_results, write_results};
use twoview_cli::runner::run_methods;
use twoview_cli::timing::{bench_methods, format_timings, prepare_batch};
use twoview_cli::HarnessError;
use twoview_core::{parse_arrangements, DatasetGrid, Method, Norm};

#[derive(Parser)]
#[command(name = "twoview", version, about = "Two-view triangulation benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic triangulation dataset.
    Generate {
        /// Camera configurations: `all` or a comma list of
        /// orbital,lateral,forward,diagonal.
        #[arg(long, default_value = "all")]
        config: String,
        /// Explicit comma list of cloud distances (scene units).
        #[arg(long, allow_hyphen_values = true, conflicts_with = "d_exponents")]
        d: Option<String>,
        /// Cloud distances as powers of two, e.g. `-1..6` or `-1,0,3`.
        #[arg(long = "d-exponents", allow_hyphen_values = true)]
        d_exponents: Option<String>,
        /// Pixel noise levels, e.g. `1..8` or `0,2,4.5`.
        #[arg(long, default_value = "1..8")]
        sigma: String,
        /// Points per cloud.
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Worker threads (0 = all cores). Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output dataset file (TSV).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run triangulation methods over a dataset and write per-problem
    /// error records.
    Run {
        /// Input dataset file from `generate`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma list of methods: mid,mid2,wmid2,dlt,linls,l2it.
        #[arg(long, default_value = "mid,mid2,wmid2,dlt,linls,l2it")]
        methods: String,
        /// Worker threads (0 = all cores). Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output results file (TSV).
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a results file by noise level and raw-parallax bin.
    Report {
        /// Input results file from `run`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Raw-parallax bin edges in degrees.
        #[arg(long, default_value = "0,2,4,90")]
        bins: String,
        /// Norm for the 2D summary columns: l1, l2 or linf.
        #[arg(long, default_value = "l2")]
        norm: String,
        /// Output report file (CSV).
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure kernel throughput on an in-memory batch.
    Bench {
        /// Batch size (number of triangulation problems).
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
        /// Timing repetitions per method (median is reported).
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value = "mid,mid2,wmid2,dlt,linls,l2it")]
        methods: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_methods(s: &str) -> Result<Vec<Method>, HarnessError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<Method>()
                .map_err(|e| HarnessError::UnknownMethod(e.to_string()))
        })
        .collect()
}

/// `lo..hi` (inclusive, integer steps) or a comma list of values.
fn parse_value_list(s: &str, what: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Usage(format!("cannot parse {what} value `{s}`"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    s.split(',').map(|part| part.trim().parse::<f64>().map_err(|_| bad())).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    config: &str,
    d: Option<&str>,
    d_exponents: Option<&str>,
    sigma: &str,
    points: usize,
    seed: u64,
    workers: usize,
    out: &Path,
) -> Result<(), HarnessError> {
    let arrangements =
        parse_arrangements(config).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let d_values = match (d, d_exponents) {
        (Some(list), None) => {
            let values = parse_value_list(list, "--d")?;
            if values.iter().any(|&v| v <= 0.0) {
                return Err(HarnessError::Usage("--d values must be positive".into()));
            }
            values
        }
        (None, Some(exps)) => parse_value_list(exps, "--d-exponents")?
            .into_iter()
            .map(|n| 2f64.powi(n as i32))
            .collect(),
        (None, None) => (-1..=6).map(|n| 2f64.powi(n)).collect(),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let sigmas = parse_value_list(sigma, "--sigma")?;
    if sigmas.iter().any(|&s| s < 0.0) {
        return Err(HarnessError::Usage("--sigma values must be nonnegative".into()));
    }
    if points == 0 {
        return Err(HarnessError::Usage("--points must be positive".into()));
    }

    let grid = DatasetGrid {
        arrangements,
        d_values,
        sigmas,
        points_per_cloud: points,
        seed,
        ..DatasetGrid::default()
    };
    let dataset = generate_parallel(&grid, workers);
    write_problems(out, &dataset.problems)?;
    println!(
        "wrote {} problems to {} ({} rejected by the visibility check)",
        dataset.problems.len(),
        out.display(),
        dataset.rejected
    );
    Ok(())
}

fn cmd_run(
    input: &Path,
    methods: &str,
    workers: usize,
    out: &Path,
) -> Result<(), HarnessError> {
    let methods = parse_methods(methods)?;
    let problems = read_problems(input)?;
    let rows = run_methods(&problems, &methods, workers);
    write_results(out, &rows)?;
    println!(
        "wrote {} rows ({} problems x {} methods) to {}",
        rows.len(),
        problems.len(),
        methods.len(),
        out.display()
    );
    Ok(())
}

fn cmd_report(input: &Path, bins: &str, norm: &str, out: &Path) -> Result<(), HarnessError> {
    let edges = parse_value_list(bins, "--bins")?;
    let bins = Binning::new(edges)?;
    let norm: Norm = norm
        .parse()
        .map_err(|_| HarnessError::Usage(format!("unknown norm `{norm}` (use l1, l2 or linf)")))?;
    let rows = read_results(input)?;
    let agg = aggregate(&rows, &bins);
    write_report(out, &agg, norm)?;
    println!("wrote {} aggregate rows to {}", agg.len(), out.display());
    Ok(())
}

fn cmd_bench(
    points: usize,
    reps: usize,
    methods: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), HarnessError> {
    if points == 0 || reps == 0 {
        return Err(HarnessError::Usage("--points and --reps must be positive".into()));
    }
    let methods = parse_methods(methods)?;
    let batch = prepare_batch(points, seed);
    let rows = bench_methods(&methods, &batch, reps);
    let text = format_timings(&rows);
    match out {
        Some(path) => {
            std::fs::write(path, &text)?;
            println!("wrote timings to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Cmd::Generate { config, d, d_exponents, sigma, points, seed, workers, out } => {
            cmd_generate(
                config,
                d.as_deref(),
                d_exponents.as_deref(),
                sigma,
                *points,
                *seed,
                *workers,
                out,
            )
        }
        Cmd::Run { input, methods, workers, out } => cmd_run(input, methods, *workers, out),
        Cmd::Report { input, bins, norm, out } => cmd_report(input, bins, norm, out),
        Cmd::Bench { points, reps, methods, seed, out } => {
            cmd_bench(*points, *reps, methods, *seed, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
