//! Command-line harness around the benchmark applications.
//!
//! `bench` runs cells and emits CSV, `sweep` scans block counts across all
//! modes, `verify` checks that the three execution modes agree on results.
//! Exit codes: 0 success, 1 execution or verification failure, 2 usage.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spliter_core::apps::{
    approx_eq_rel, run_csvm, run_histogram, run_kmeans, run_knn, AppConfig, AppKind, Mode,
};
use spliter_core::bench::{run_experiment, Grid};

#[derive(Parser)]
#[command(
    name = "spliter",
    version,
    about = "Granularity experiments on a deterministic task runtime"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more cells of an app and emit CSV rows.
    Bench(CellArgs),
    /// Scan blocks-per-worker across modes (defaults: 1,4,16,48 and all modes).
    Sweep(CellArgs),
    /// Run all three modes and check that their results agree.
    Verify(CellArgs),
}

#[derive(Args, Clone)]
struct CellArgs {
    /// Application: histogram | kmeans | csvm | knn
    app: String,

    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    threads_per_worker: Option<usize>,
    /// Blocks per worker; accepts a comma-separated list for grids.
    #[arg(long)]
    blocks_per_worker: Option<String>,
    #[arg(long)]
    block_rows: Option<usize>,
    /// Execution mode: baseline | spliter | rechunk (default: all for
    /// sweep, baseline for bench).
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    partitions_per_worker: Option<usize>,
    /// Virtual scheduler overhead per task, microseconds.
    #[arg(long)]
    sched_overhead_us: Option<u64>,
    /// Virtual network bandwidth, megabytes per second (default unlimited).
    #[arg(long)]
    bandwidth_mbps: Option<u64>,
    /// Virtual network latency per transfer, microseconds.
    #[arg(long)]
    latency_us: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Repetitions per cell.
    #[arg(long)]
    reps: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    dims: Option<usize>,

    /// Histogram: bins per dimension.
    #[arg(long)]
    bins: Option<usize>,
    /// K-means: cluster count.
    #[arg(long)]
    k: Option<usize>,
    /// K-means: Lloyd iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// SVM box constraint.
    #[arg(long = "C")]
    c: Option<f64>,
    /// kNN: neighbors per query.
    #[arg(long)]
    knn_k: Option<usize>,
    /// kNN: query blocks per worker.
    #[arg(long)]
    query_blocks: Option<usize>,
}

fn usage_error(msg: String) -> clap::Error {
    clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{msg}\n"))
}

fn parse_bpw_list(s: &str) -> Result<Vec<usize>, clap::Error> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| usage_error(format!("invalid blocks-per-worker value '{part}'")))
        })
        .collect()
}

fn build_config(args: &CellArgs, default_mode: Mode) -> Result<AppConfig, clap::Error> {
    let app: AppKind = args.app.parse().map_err(|e| usage_error(format!("{e}")))?;
    let mode = match &args.mode {
        Some(m) => m.parse().map_err(|e| usage_error(format!("{e}")))?,
        None => default_mode,
    };
    let mut cfg = AppConfig::new(app, mode);
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = args.threads_per_worker {
        cfg.threads_per_worker = v;
    }
    if let Some(v) = args.block_rows {
        cfg.block_rows = v;
    }
    if let Some(v) = args.partitions_per_worker {
        cfg.partitions_per_worker = v;
    }
    if let Some(v) = args.sched_overhead_us {
        cfg.sched_overhead_ns = v * 1_000;
    }
    if let Some(v) = args.bandwidth_mbps {
        cfg.bandwidth_bytes_per_sec = Some(v * 1_000_000);
    }
    if let Some(v) = args.latency_us {
        cfg.latency_ns = v * 1_000;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.dims {
        cfg.dims = v;
    }
    if let Some(v) = args.bins {
        cfg.bins = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.iters {
        cfg.iters = v;
    }
    if let Some(v) = args.c {
        cfg.svm_c = v;
    }
    if let Some(v) = args.knn_k {
        cfg.knn_k = v;
    }
    if let Some(v) = args.query_blocks {
        cfg.query_blocks_per_worker = v;
    }
    Ok(cfg)
}

fn csv_sink(args: &CellArgs) -> io::Result<Box<dyn Write>> {
    Ok(match &args.csv {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout()),
    })
}

fn cmd_bench(args: &CellArgs, sweep: bool) -> Result<ExitCode, String> {
    let cfg = match build_config(args, Mode::Baseline) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let modes = match (&args.mode, sweep) {
        (Some(_), _) => vec![cfg.mode],
        (None, true) => Mode::ALL.to_vec(),
        (None, false) => vec![Mode::Baseline],
    };
    let blocks = match &args.blocks_per_worker {
        Some(s) => match parse_bpw_list(s) {
            Ok(v) => v,
            Err(e) => e.exit(),
        },
        None if sweep => vec![1, 4, 16, 48],
        None => vec![cfg.blocks_per_worker],
    };
    let grid = Grid {
        modes,
        workers: vec![cfg.workers],
        blocks_per_worker: blocks,
        seeds: vec![cfg.seed],
        reps: args.reps.unwrap_or(3),
        template: cfg,
    };
    let mut out = csv_sink(args).map_err(|e| e.to_string())?;
    run_experiment(&grid, &mut out).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &CellArgs) -> Result<ExitCode, String> {
    let base_cfg = match build_config(args, Mode::Baseline) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let with_mode = |mode: Mode| {
        let mut c = base_cfg.clone();
        c.mode = mode;
        c
    };
    let app = base_cfg.app;
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("PASS {app} {name}: {detail}");
        } else {
            println!("FAIL {app} {name}: {detail}");
            failures += 1;
        }
    };

    match app {
        AppKind::Histogram => {
            let b = run_histogram(&with_mode(Mode::Baseline)).map_err(|e| e.to_string())?;
            let s = run_histogram(&with_mode(Mode::Spliter)).map_err(|e| e.to_string())?;
            let r = run_histogram(&with_mode(Mode::Rechunk)).map_err(|e| e.to_string())?;
            check(
                "mode equivalence",
                b.histogram == s.histogram && b.histogram == r.histogram,
                format!(
                    "tensors bit-identical across modes (checksum {:016x})",
                    b.report.result_checksum
                ),
            );
            check(
                "conservation",
                b.histogram.total() + b.histogram.discarded == (base_cfg.n_rows() as u64),
                format!(
                    "counted {} of {} rows",
                    b.histogram.total(),
                    base_cfg.n_rows()
                ),
            );
        }
        AppKind::Kmeans => {
            let b = run_kmeans(&with_mode(Mode::Baseline)).map_err(|e| e.to_string())?;
            let s = run_kmeans(&with_mode(Mode::Spliter)).map_err(|e| e.to_string())?;
            let r = run_kmeans(&with_mode(Mode::Rechunk)).map_err(|e| e.to_string())?;
            let agree = |x: &[f64], y: &[f64]| {
                x.iter()
                    .zip(y.iter())
                    .all(|(a, b)| approx_eq_rel(*a, *b, 1e-9))
            };
            check(
                "mode equivalence",
                agree(&b.centers, &s.centers) && agree(&b.centers, &r.centers),
                "centers agree within 1e-9 relative".into(),
            );
            let monotone = b
                .inertia_trace
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
            check("inertia descent", monotone, "trace non-increasing".into());
        }
        AppKind::Csvm => {
            let b = run_csvm(&with_mode(Mode::Baseline)).map_err(|e| e.to_string())?;
            let s = run_csvm(&with_mode(Mode::Spliter)).map_err(|e| e.to_string())?;
            let r = run_csvm(&with_mode(Mode::Rechunk)).map_err(|e| e.to_string())?;
            check(
                "mode equivalence",
                (b.accuracy - s.accuracy).abs() <= 0.01
                    && (b.accuracy - r.accuracy).abs() <= 0.01,
                format!(
                    "accuracies {:.4}/{:.4}/{:.4} within 0.01",
                    b.accuracy, s.accuracy, r.accuracy
                ),
            );
            check(
                "separable accuracy",
                b.accuracy >= 0.99 && s.accuracy >= 0.99 && r.accuracy >= 0.99,
                "all modes at or above 0.99".into(),
            );
        }
        AppKind::Knn => {
            let b = run_knn(&with_mode(Mode::Baseline)).map_err(|e| e.to_string())?;
            let s = run_knn(&with_mode(Mode::Spliter)).map_err(|e| e.to_string())?;
            let r = run_knn(&with_mode(Mode::Rechunk)).map_err(|e| e.to_string())?;
            check(
                "mode equivalence",
                b.indexes == s.indexes && b.indexes == r.indexes,
                format!("{} query rows, identical neighbor ids", b.indexes.len()),
            );
            check(
                "lookup consolidation",
                s.distance_evals <= b.distance_evals,
                format!(
                    "distance evals {} (consolidated) vs {} (per-block)",
                    s.distance_evals, b.distance_evals
                ),
            );
        }
    }

    if failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bench(args) => cmd_bench(args, false),
        Command::Sweep(args) => cmd_bench(args, true),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
