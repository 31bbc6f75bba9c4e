//! C ABI over the spliter runtime.
//!
//! Conventions: every fallible call returns a [`Status`]; out-parameters are
//! written only on `STATUS_OK`; handles are opaque pointers owned by the
//! caller and released with the matching `_free` function. On failure,
//! [`spliter_last_error`] returns a thread-local message describing the most
//! recent error.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use spliter_core::apps::{run_app, AppConfig, AppKind, Mode};
use spliter_core::blocked::{checksum, create_array, BlockedArray, Generator, PlacementPolicy};
use spliter_core::rechunk::{balanced_block_rows, rechunk};
use spliter_core::spliter::{split, Partition};
use spliter_core::{Runtime, RuntimeConfig};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: impl std::fmt::Display) {
    let cleaned = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// Arguments were structurally invalid (bad sizes, unknown ids).
    InvalidArgument = 2,
    /// The runtime reported a failure while executing the call.
    RuntimeError = 3,
}

/// Message for the most recent failing call on this thread. The pointer is
/// valid until the next failing call; never free it.
#[no_mangle]
pub extern "C" fn spliter_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque runtime handle.
pub struct SpliterRuntime {
    rt: Runtime,
}

/// Opaque blocked-array handle, tied to the runtime that created it.
pub struct SpliterArray {
    arr: BlockedArray,
}

/// Opaque partition list produced by [`spliter_split`].
pub struct SpliterPartitions {
    parts: Vec<Partition>,
}

/// Runtime knobs; `bandwidth_bytes_per_sec == 0` means unlimited.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct SpliterRuntimeConfig {
    pub num_workers: u64,
    pub threads_per_worker: u64,
    pub sched_overhead_ns: u64,
    pub bandwidth_bytes_per_sec: u64,
    pub latency_ns: u64,
    pub inject_real_overhead: bool,
}

/// Counter snapshot.
#[repr(C)]
#[derive(Clone, Copy, Default)]
pub struct SpliterMetrics {
    pub tasks_submitted: u64,
    pub bytes_transferred: u64,
    pub transfers: u64,
    pub locality_hits: u64,
    pub accounted_overhead_ns: u64,
    pub virtual_transfer_ns: u64,
}

/// Dataset generator selector for [`spliter_array_create`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// Coordinates uniform in [0, 1).
    Uniform = 0,
    /// Two Gaussian blobs, unit spread, alternating by row.
    TwoBlobs = 1,
    /// +1 / -1 label column by row parity.
    BlobLabels = 2,
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_last_error("null pointer argument");
                return Status::NullPointer;
            }
        }
    };
}

macro_rules! nonnull_mut {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_last_error("null pointer argument");
                return Status::NullPointer;
            }
        }
    };
}

/// Start a runtime.
///
/// # Safety
/// `config` and `out` must be valid pointers; `*out` is overwritten on
/// success with a handle that must be released via [`spliter_runtime_free`].
#[no_mangle]
pub unsafe extern "C" fn spliter_runtime_new(
    config: *const SpliterRuntimeConfig,
    out: *mut *mut SpliterRuntime,
) -> Status {
    let config = nonnull!(config);
    if out.is_null() {
        set_last_error("null out pointer");
        return Status::NullPointer;
    }
    let rc = RuntimeConfig {
        num_workers: config.num_workers as usize,
        threads_per_worker: config.threads_per_worker.max(1) as usize,
        sched_overhead_ns: config.sched_overhead_ns,
        bandwidth_bytes_per_sec: match config.bandwidth_bytes_per_sec {
            0 => None,
            v => Some(v),
        },
        latency_ns: config.latency_ns,
        inject_real_overhead: config.inject_real_overhead,
    };
    match Runtime::start(rc) {
        Ok(rt) => {
            unsafe { *out = Box::into_raw(Box::new(SpliterRuntime { rt })) };
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::InvalidArgument
        }
    }
}

/// Release a runtime handle. Safe to call with null.
///
/// # Safety
/// `rt` must be null or a pointer from [`spliter_runtime_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spliter_runtime_free(rt: *mut SpliterRuntime) {
    if !rt.is_null() {
        drop(unsafe { Box::from_raw(rt) });
    }
}

/// Snapshot the runtime counters.
///
/// # Safety
/// `rt` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spliter_runtime_metrics(
    rt: *const SpliterRuntime,
    out: *mut SpliterMetrics,
) -> Status {
    let rt = nonnull!(rt);
    let out = nonnull_mut!(out);
    let m = rt.rt.metrics();
    *out = SpliterMetrics {
        tasks_submitted: m.tasks_submitted,
        bytes_transferred: m.bytes_transferred,
        transfers: m.transfers,
        locality_hits: m.locality_hits,
        accounted_overhead_ns: m.accounted_overhead_ns,
        virtual_transfer_ns: m.virtual_transfer_ns,
    };
    Status::Ok
}

/// Create a seeded dataset, blocks placed round-robin.
///
/// # Safety
/// `rt` and `out` must be valid pointers; the handle written to `*out` must
/// be released via [`spliter_array_free`] before the runtime is freed.
#[no_mangle]
pub unsafe extern "C" fn spliter_array_create(
    rt: *const SpliterRuntime,
    kind: ArrayKind,
    n_rows: u64,
    dims: u64,
    block_rows: u64,
    seed: u64,
    out: *mut *mut SpliterArray,
) -> Status {
    let rt = nonnull!(rt);
    if out.is_null() {
        set_last_error("null out pointer");
        return Status::NullPointer;
    }
    let gen = match kind {
        ArrayKind::Uniform => Generator::UniformCube,
        ArrayKind::TwoBlobs => Generator::GaussianBlobs { k: 2, spread: 1.0 },
        ArrayKind::BlobLabels => Generator::BlobLabels,
    };
    match create_array(
        &rt.rt,
        n_rows as usize,
        dims as usize,
        block_rows as usize,
        &PlacementPolicy::RoundRobin,
        &gen,
        seed,
    ) {
        Ok(arr) => {
            unsafe { *out = Box::into_raw(Box::new(SpliterArray { arr })) };
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::InvalidArgument
        }
    }
}

/// Release an array handle. Safe to call with null.
///
/// # Safety
/// `arr` must be null or a pointer from an array-producing call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spliter_array_free(arr: *mut SpliterArray) {
    if !arr.is_null() {
        drop(unsafe { Box::from_raw(arr) });
    }
}

/// Number of blocks of an array.
///
/// # Safety
/// `arr` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spliter_array_n_blocks(
    arr: *const SpliterArray,
    out: *mut u64,
) -> Status {
    let arr = nonnull!(arr);
    let out = nonnull_mut!(out);
    *out = arr.arr.n_blocks() as u64;
    Status::Ok
}

/// Worker id of every block, in block order. `cap` is the capacity of
/// `out_workers`; the call fails if it is too small.
///
/// # Safety
/// `rt` and `arr` must be valid; `out_workers` must point to `cap` writable
/// `uint64_t`s.
#[no_mangle]
pub unsafe extern "C" fn spliter_array_block_locations(
    rt: *const SpliterRuntime,
    arr: *const SpliterArray,
    out_workers: *mut u64,
    cap: u64,
) -> Status {
    let rt = nonnull!(rt);
    let arr = nonnull!(arr);
    if out_workers.is_null() {
        set_last_error("null out pointer");
        return Status::NullPointer;
    }
    if (cap as usize) < arr.arr.n_blocks() {
        set_last_error(format!(
            "capacity {cap} below block count {}",
            arr.arr.n_blocks()
        ));
        return Status::InvalidArgument;
    }
    match rt.rt.who_has(&arr.arr.blocks) {
        Ok(owners) => {
            for (i, w) in owners.iter().enumerate() {
                unsafe { *out_workers.add(i) = w.0 as u64 };
            }
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::RuntimeError
        }
    }
}

/// Order-sensitive content digest of an array.
///
/// # Safety
/// `rt`, `arr` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spliter_array_checksum(
    rt: *const SpliterRuntime,
    arr: *const SpliterArray,
    out: *mut u64,
) -> Status {
    let rt = nonnull!(rt);
    let arr = nonnull!(arr);
    let out = nonnull_mut!(out);
    match checksum(&rt.rt, &arr.arr) {
        Ok(v) => {
            *out = v;
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::RuntimeError
        }
    }
}

/// Materialize the array under a new block size (see the core semantics:
/// same-size rechunk is a free no-op; otherwise transfers are counted).
///
/// # Safety
/// `rt`, `arr` and `out` must be valid pointers; `*out` must be released
/// via [`spliter_array_free`].
#[no_mangle]
pub unsafe extern "C" fn spliter_array_rechunk(
    rt: *const SpliterRuntime,
    arr: *const SpliterArray,
    new_block_rows: u64,
    out: *mut *mut SpliterArray,
) -> Status {
    let rt = nonnull!(rt);
    let arr = nonnull!(arr);
    if out.is_null() {
        set_last_error("null out pointer");
        return Status::NullPointer;
    }
    match rechunk(&rt.rt, &arr.arr, new_block_rows as usize) {
        Ok(new_arr) => {
            unsafe { *out = Box::into_raw(Box::new(SpliterArray { arr: new_arr })) };
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::InvalidArgument
        }
    }
}

/// Block rows that give one block per worker thread.
///
/// # Safety
/// `rt` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spliter_balanced_block_rows(
    rt: *const SpliterRuntime,
    n_rows: u64,
    out: *mut u64,
) -> Status {
    let rt = nonnull!(rt);
    let out = nonnull_mut!(out);
    *out = balanced_block_rows(&rt.rt, n_rows as usize) as u64;
    Status::Ok
}

/// Build worker-local partitions without moving any data.
///
/// # Safety
/// `rt`, `arr` and `out` must be valid pointers; `*out` must be released
/// via [`spliter_partitions_free`].
#[no_mangle]
pub unsafe extern "C" fn spliter_split(
    rt: *const SpliterRuntime,
    arr: *const SpliterArray,
    partitions_per_worker: u64,
    out: *mut *mut SpliterPartitions,
) -> Status {
    let rt = nonnull!(rt);
    let arr = nonnull!(arr);
    if out.is_null() {
        set_last_error("null out pointer");
        return Status::NullPointer;
    }
    match split(&rt.rt, &arr.arr, partitions_per_worker as usize) {
        Ok(parts) => {
            unsafe { *out = Box::into_raw(Box::new(SpliterPartitions { parts })) };
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::InvalidArgument
        }
    }
}

/// Release a partition list. Safe to call with null.
///
/// # Safety
/// `parts` must be null or a pointer from [`spliter_split`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spliter_partitions_free(parts: *mut SpliterPartitions) {
    if !parts.is_null() {
        drop(unsafe { Box::from_raw(parts) });
    }
}

/// Number of partitions in the list.
///
/// # Safety
/// `parts` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spliter_partitions_count(parts: *const SpliterPartitions) -> u64 {
    match unsafe { parts.as_ref() } {
        Some(p) => p.parts.len() as u64,
        None => 0,
    }
}

fn partition_at(parts: &SpliterPartitions, index: u64) -> Option<&Partition> {
    parts.parts.get(index as usize)
}

/// Worker that owns partition `index`.
///
/// # Safety
/// `parts` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spliter_partition_worker(
    parts: *const SpliterPartitions,
    index: u64,
    out: *mut u64,
) -> Status {
    let parts = nonnull!(parts);
    let out = nonnull_mut!(out);
    match partition_at(parts, index) {
        Some(p) => {
            *out = p.worker.0 as u64;
            Status::Ok
        }
        None => {
            set_last_error(format!("partition index {index} out of range"));
            Status::InvalidArgument
        }
    }
}

/// Copy the global block indexes of partition `index` into `buf`
/// (`cap` capacity); writes the count to `written`.
///
/// # Safety
/// `parts` and `written` must be valid; `buf` must point to `cap` writable
/// `uint64_t`s.
#[no_mangle]
pub unsafe extern "C" fn spliter_partition_indexes(
    parts: *const SpliterPartitions,
    index: u64,
    buf: *mut u64,
    cap: u64,
    written: *mut u64,
) -> Status {
    let parts = nonnull!(parts);
    let written = nonnull_mut!(written);
    let Some(p) = partition_at(parts, index) else {
        set_last_error(format!("partition index {index} out of range"));
        return Status::InvalidArgument;
    };
    let idx = p.get_indexes();
    if (cap as usize) < idx.len() || buf.is_null() {
        set_last_error(format!("capacity {cap} below index count {}", idx.len()));
        return Status::InvalidArgument;
    }
    for (i, v) in idx.iter().enumerate() {
        unsafe { *buf.add(i) = *v as u64 };
    }
    *written = idx.len() as u64;
    Status::Ok
}

/// Copy the global row index of every item in partition `index` into `buf`.
///
/// # Safety
/// Same contract as [`spliter_partition_indexes`].
#[no_mangle]
pub unsafe extern "C" fn spliter_partition_item_indexes(
    parts: *const SpliterPartitions,
    index: u64,
    buf: *mut u64,
    cap: u64,
    written: *mut u64,
) -> Status {
    let parts = nonnull!(parts);
    let written = nonnull_mut!(written);
    let Some(p) = partition_at(parts, index) else {
        set_last_error(format!("partition index {index} out of range"));
        return Status::InvalidArgument;
    };
    let items = p.get_item_indexes();
    if (cap as usize) < items.len() || buf.is_null() {
        set_last_error(format!("capacity {cap} below item count {}", items.len()));
        return Status::InvalidArgument;
    }
    for (i, v) in items.iter().enumerate() {
        unsafe { *buf.add(i) = *v as u64 };
    }
    *written = items.len() as u64;
    Status::Ok
}

/// Benchmark application selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum App {
    Histogram = 0,
    Kmeans = 1,
    Csvm = 2,
    Knn = 3,
}

/// Execution mode selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Baseline = 0,
    Spliter = 1,
    Rechunk = 2,
}

/// Full description of one benchmark cell.
/// `bandwidth_bytes_per_sec == 0` means unlimited.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct SpliterAppParams {
    pub app: App,
    pub mode: RunMode,
    pub workers: u64,
    pub threads_per_worker: u64,
    pub blocks_per_worker: u64,
    pub block_rows: u64,
    pub dims: u64,
    pub seed: u64,
    pub partitions_per_worker: u64,
    pub sched_overhead_ns: u64,
    pub bandwidth_bytes_per_sec: u64,
    pub latency_ns: u64,
    pub bins: u64,
    pub k: u64,
    pub iters: u64,
    pub svm_c: f64,
    pub cascade_max_iter: u64,
    pub knn_k: u64,
    pub query_blocks_per_worker: u64,
}

/// Deterministic counters plus wall time of one app run.
#[repr(C)]
#[derive(Clone, Copy, Default)]
pub struct SpliterAppStats {
    pub metrics: SpliterMetrics,
    pub map_tasks: u64,
    pub map_bytes: u64,
    pub result_checksum: u64,
    pub wall_ms: f64,
}

fn app_kind(app: App) -> AppKind {
    match app {
        App::Histogram => AppKind::Histogram,
        App::Kmeans => AppKind::Kmeans,
        App::Csvm => AppKind::Csvm,
        App::Knn => AppKind::Knn,
    }
}

fn run_mode(mode: RunMode) -> Mode {
    match mode {
        RunMode::Baseline => Mode::Baseline,
        RunMode::Spliter => Mode::Spliter,
        RunMode::Rechunk => Mode::Rechunk,
    }
}

/// Fill `out` with the default cell parameters of an app.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spliter_app_params_default(
    app: App,
    mode: RunMode,
    out: *mut SpliterAppParams,
) -> Status {
    let out = nonnull_mut!(out);
    let cfg = AppConfig::new(app_kind(app), run_mode(mode));
    *out = SpliterAppParams {
        app,
        mode,
        workers: cfg.workers as u64,
        threads_per_worker: cfg.threads_per_worker as u64,
        blocks_per_worker: cfg.blocks_per_worker as u64,
        block_rows: cfg.block_rows as u64,
        dims: cfg.dims as u64,
        seed: cfg.seed,
        partitions_per_worker: cfg.partitions_per_worker as u64,
        sched_overhead_ns: cfg.sched_overhead_ns,
        bandwidth_bytes_per_sec: cfg.bandwidth_bytes_per_sec.unwrap_or(0),
        latency_ns: cfg.latency_ns,
        bins: cfg.bins as u64,
        k: cfg.k as u64,
        iters: cfg.iters as u64,
        svm_c: cfg.svm_c,
        cascade_max_iter: cfg.cascade_max_iter as u64,
        knn_k: cfg.knn_k as u64,
        query_blocks_per_worker: cfg.query_blocks_per_worker as u64,
    };
    Status::Ok
}

/// Run one benchmark cell end to end (its runtime is created and torn down
/// internally) and write the counters to `out`.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spliter_app_run(
    params: *const SpliterAppParams,
    out: *mut SpliterAppStats,
) -> Status {
    let p = nonnull!(params);
    let out = nonnull_mut!(out);
    let mut cfg = AppConfig::new(app_kind(p.app), run_mode(p.mode));
    cfg.workers = p.workers as usize;
    cfg.threads_per_worker = p.threads_per_worker as usize;
    cfg.blocks_per_worker = p.blocks_per_worker as usize;
    cfg.block_rows = p.block_rows as usize;
    cfg.dims = p.dims as usize;
    cfg.seed = p.seed;
    cfg.partitions_per_worker = p.partitions_per_worker as usize;
    cfg.sched_overhead_ns = p.sched_overhead_ns;
    cfg.bandwidth_bytes_per_sec = match p.bandwidth_bytes_per_sec {
        0 => None,
        v => Some(v),
    };
    cfg.latency_ns = p.latency_ns;
    cfg.bins = p.bins as usize;
    cfg.k = p.k as usize;
    cfg.iters = p.iters as usize;
    cfg.svm_c = p.svm_c;
    cfg.cascade_max_iter = p.cascade_max_iter as usize;
    cfg.knn_k = p.knn_k as usize;
    cfg.query_blocks_per_worker = p.query_blocks_per_worker as usize;

    match run_app(&cfg) {
        Ok(report) => {
            *out = SpliterAppStats {
                metrics: SpliterMetrics {
                    tasks_submitted: report.metrics.tasks_submitted,
                    bytes_transferred: report.metrics.bytes_transferred,
                    transfers: report.metrics.transfers,
                    locality_hits: report.metrics.locality_hits,
                    accounted_overhead_ns: report.metrics.accounted_overhead_ns,
                    virtual_transfer_ns: report.metrics.virtual_transfer_ns,
                },
                map_tasks: report.map_tasks,
                map_bytes: report.map_bytes,
                result_checksum: report.result_checksum,
                wall_ms: report.wall_ms,
            };
            Status::Ok
        }
        Err(e) => {
            set_last_error(e);
            Status::RuntimeError
        }
    }
}
