//! The four benchmark applications, each runnable in three modes:
//!
//! * `baseline` - one map task per block;
//! * `spliter`  - one map task per worker-local partition;
//! * `rechunk`  - materialize balanced blocks first, then run baseline.
//!
//! Results agree across modes (bit-exact for integer outputs, tight
//! tolerance for float reductions); the counters diverge, which is the
//! point of the comparison.

mod csvm;
mod histogram;
mod kmeans;
mod knn;

pub use csvm::{run_csvm, CsvmRun};
pub use histogram::{run_histogram, HistogramRun};
pub use kmeans::{run_kmeans, KMeansRun};
pub use knn::{run_knn, KnnRun};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::runtime::{DataRef, Metrics, Runtime, RuntimeConfig, TaskFn, TaskFuture};

/// Fixed fan-in of the partial-result reductions.
pub(crate) const REDUCE_ARITY: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppKind {
    Histogram,
    Kmeans,
    Csvm,
    Knn,
}

impl fmt::Display for AppKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AppKind::Histogram => "histogram",
            AppKind::Kmeans => "kmeans",
            AppKind::Csvm => "csvm",
            AppKind::Knn => "knn",
        };
        f.write_str(s)
    }
}

impl FromStr for AppKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "histogram" => Ok(AppKind::Histogram),
            "kmeans" => Ok(AppKind::Kmeans),
            "csvm" => Ok(AppKind::Csvm),
            "knn" => Ok(AppKind::Knn),
            other => Err(Error::InvalidArgument(format!(
                "unknown app '{other}' (histogram|kmeans|csvm|knn)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Baseline,
    Spliter,
    Rechunk,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Baseline, Mode::Spliter, Mode::Rechunk];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Baseline => "baseline",
            Mode::Spliter => "spliter",
            Mode::Rechunk => "rechunk",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "spliter" => Ok(Mode::Spliter),
            "rechunk" => Ok(Mode::Rechunk),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}' (baseline|spliter|rechunk)"
            ))),
        }
    }
}

/// One experiment cell: scenario axes plus per-app parameters.
#[derive(Clone, Debug)]
pub struct AppConfig {
    pub app: AppKind,
    pub mode: Mode,
    pub workers: usize,
    pub threads_per_worker: usize,
    pub blocks_per_worker: usize,
    pub block_rows: usize,
    pub dims: usize,
    pub seed: u64,
    pub partitions_per_worker: usize,
    pub sched_overhead_ns: u64,
    pub bandwidth_bytes_per_sec: Option<u64>,
    pub latency_ns: u64,
    pub inject_real_overhead: bool,
    /// Histogram: bins per dimension.
    pub bins: usize,
    /// K-means: cluster count and Lloyd iterations.
    pub k: usize,
    pub iters: usize,
    /// Cascade SVM: box constraint and cascade iteration cap.
    pub svm_c: f64,
    pub cascade_max_iter: usize,
    /// kNN: neighbors per query and query blocks per worker.
    pub knn_k: usize,
    pub query_blocks_per_worker: usize,
}

impl AppConfig {
    /// Defaults sized so any cell finishes in seconds on a laptop.
    pub fn new(app: AppKind, mode: Mode) -> Self {
        let block_rows = match app {
            AppKind::Csvm => 256,
            _ => 1024,
        };
        let dims = match app {
            AppKind::Histogram => 5,
            AppKind::Kmeans => 20,
            AppKind::Csvm => 2,
            AppKind::Knn => 3,
        };
        Self {
            app,
            mode,
            workers: 2,
            threads_per_worker: 1,
            blocks_per_worker: 8,
            block_rows,
            dims,
            seed: 1234,
            partitions_per_worker: 1,
            sched_overhead_ns: 0,
            bandwidth_bytes_per_sec: None,
            latency_ns: 0,
            inject_real_overhead: false,
            bins: 8,
            k: 8,
            iters: 10,
            svm_c: 1.0,
            cascade_max_iter: 5,
            knn_k: 5,
            query_blocks_per_worker: 4,
        }
    }

    /// Total rows of the (fit) dataset.
    pub fn n_rows(&self) -> usize {
        self.workers * self.blocks_per_worker * self.block_rows
    }

    pub fn runtime_config(&self) -> RuntimeConfig {
        RuntimeConfig {
            num_workers: self.workers,
            threads_per_worker: self.threads_per_worker,
            sched_overhead_ns: self.sched_overhead_ns,
            bandwidth_bytes_per_sec: self.bandwidth_bytes_per_sec,
            latency_ns: self.latency_ns,
            inject_real_overhead: self.inject_real_overhead,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("workers", self.workers),
            ("threads_per_worker", self.threads_per_worker),
            ("blocks_per_worker", self.blocks_per_worker),
            ("block_rows", self.block_rows),
            ("dims", self.dims),
            ("partitions_per_worker", self.partitions_per_worker),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        match self.app {
            AppKind::Histogram => {
                if self.bins == 0 {
                    return Err(Error::InvalidArgument("bins must be positive".into()));
                }
            }
            AppKind::Kmeans => {
                if self.k == 0 || self.iters == 0 {
                    return Err(Error::InvalidArgument(
                        "k and iters must be positive".into(),
                    ));
                }
                if self.k > self.n_rows() {
                    return Err(Error::InvalidArgument(format!(
                        "k = {} exceeds n_rows = {}",
                        self.k,
                        self.n_rows()
                    )));
                }
            }
            AppKind::Csvm => {
                if self.svm_c <= 0.0 || self.cascade_max_iter == 0 {
                    return Err(Error::InvalidArgument(
                        "C must be positive and cascade_max_iter at least 1".into(),
                    ));
                }
            }
            AppKind::Knn => {
                if self.knn_k == 0 || self.query_blocks_per_worker == 0 {
                    return Err(Error::InvalidArgument(
                        "knn_k and query_blocks must be positive".into(),
                    ));
                }
                if self.knn_k > self.n_rows() {
                    return Err(Error::InvalidArgument(format!(
                        "knn_k = {} exceeds fit rows = {}",
                        self.knn_k,
                        self.n_rows()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Run one configured cell, discarding the app-typed result.
pub fn run_app(cfg: &AppConfig) -> Result<AppReport> {
    Ok(match cfg.app {
        AppKind::Histogram => run_histogram(cfg)?.report,
        AppKind::Kmeans => run_kmeans(cfg)?.report,
        AppKind::Csvm => run_csvm(cfg)?.report,
        AppKind::Knn => run_knn(cfg)?.report,
    })
}

/// Counters and derived figures of one app run.
#[derive(Clone, Debug)]
pub struct AppReport {
    pub metrics: Metrics,
    /// Tasks of the embarrassingly-parallel stage (all iterations).
    pub map_tasks: u64,
    /// Bytes moved while submitting the map stage; zero means the stage ran
    /// entirely on resident data.
    pub map_bytes: u64,
    pub result_checksum: u64,
    pub wall_ms: f64,
    /// App-specific `key=value` outputs, in a fixed order.
    pub extra: Vec<(String, String)>,
}

/// Stopwatch for the timed portion of a run (everything but dataset
/// generation).
pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// Wait for every future, preserving submission order.
pub(crate) fn wait_all(rt: &Runtime, futures: Vec<TaskFuture>) -> Result<Vec<DataRef>> {
    let _ = rt;
    futures.into_iter().map(|f| f.wait()).collect()
}

/// Fixed-order, fixed-arity reduction tree over partial results. `make_task`
/// builds the merge body for each group; groups of one are carried up
/// without a task. Returns the root ref (the input when only one).
pub(crate) fn tree_reduce<F>(
    rt: &Runtime,
    kind: &str,
    mut refs: Vec<DataRef>,
    make_task: F,
) -> Result<DataRef>
where
    F: Fn() -> TaskFn,
{
    if refs.is_empty() {
        return Err(Error::InvalidArgument("reduction over no inputs".into()));
    }
    while refs.len() > 1 {
        enum Slot {
            Ready(DataRef),
            Pending(TaskFuture),
        }
        let slots: Vec<Slot> = refs
            .chunks(REDUCE_ARITY)
            .map(|group| {
                if group.len() == 1 {
                    Slot::Ready(group[0])
                } else {
                    Slot::Pending(rt.submit(kind, group, None, make_task()))
                }
            })
            .collect();
        refs = slots
            .into_iter()
            .map(|s| match s {
                Slot::Ready(r) => Ok(r),
                Slot::Pending(f) => f.wait(),
            })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(refs[0])
}

/// `|a - b|` within `tol` relative to the larger magnitude (absolute floor
/// of `tol` near zero).
pub fn approx_eq_rel(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1e-12);
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::{Value, WorkerId};

    #[test]
    fn mode_and_app_round_trip_strings() {
        for mode in Mode::ALL {
            assert_eq!(mode.to_string().parse::<Mode>().unwrap(), mode);
        }
        for app in [AppKind::Histogram, AppKind::Kmeans, AppKind::Csvm, AppKind::Knn] {
            assert_eq!(app.to_string().parse::<AppKind>().unwrap(), app);
        }
        assert!("turbo".parse::<Mode>().is_err());
    }

    #[test]
    fn tree_reduce_sums_in_fixed_groups() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let refs: Vec<DataRef> = (0..20)
            .map(|i| rt.put(Value::I64(i), WorkerId((i % 2) as usize)).unwrap())
            .collect();
        let root = tree_reduce(&rt, "sum", refs, || {
            Box::new(|inputs| {
                let mut acc = 0;
                for v in inputs {
                    acc += v.as_i64()?;
                }
                Ok(Value::I64(acc))
            })
        })
        .unwrap();
        let total = rt.peek(root).unwrap().as_i64().unwrap();
        assert_eq!(total, (0..20).sum::<i64>());
        // 20 -> 3 groups (8, 8, 4) -> 1 group of 3.
        assert_eq!(rt.metrics().kind_count("sum"), 4);
    }

    #[test]
    fn tree_reduce_single_input_needs_no_task() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let r = rt.put(Value::I64(5), WorkerId(0)).unwrap();
        let root = tree_reduce(&rt, "sum", vec![r], || {
            Box::new(|_| Ok(Value::I64(0)))
        })
        .unwrap();
        assert_eq!(root, r);
        assert_eq!(rt.metrics().tasks_submitted, 0);
    }

    #[test]
    fn config_validation_catches_bad_cells() {
        let mut cfg = AppConfig::new(AppKind::Kmeans, Mode::Baseline);
        cfg.k = cfg.n_rows() + 1;
        assert!(cfg.validate().is_err());
        let mut cfg = AppConfig::new(AppKind::Knn, Mode::Spliter);
        cfg.knn_k = 0;
        assert!(cfg.validate().is_err());
        let cfg = AppConfig::new(AppKind::Histogram, Mode::Rechunk);
        assert!(cfg.validate().is_ok());
    }
}
