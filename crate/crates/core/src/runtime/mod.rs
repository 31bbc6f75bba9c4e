//! In-process task runtime: a single-threaded coordinator drives a set of
//! worker executors, each owning a block store. Every byte that crosses a
//! worker boundary is counted, so locality behavior is observable without
//! timing anything.
//!
//! Values are immutable once stored; a transfer moves ownership of a value
//! between stores and never copies it. Ref identity survives the move, so a
//! stale handle still resolves to the value's current location.

mod future;
mod metrics;
mod value;

pub use future::{FutureState, TaskFuture};
pub use metrics::Metrics;
pub use value::{Block, KMeansUpdate, KdTreeFit, KnnHits, Value};

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::error::{Error, Result};
use future::FutureInner;
use metrics::MetricsInner;

/// Identifier of one worker executor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorkerId(pub usize);

impl std::fmt::Display for WorkerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// Handle to a stored value. The id is the identity; `owner` and
/// `size_bytes` are a snapshot from when the handle was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DataRef {
    pub id: u64,
    pub owner: WorkerId,
    pub size_bytes: u64,
}

#[derive(Clone, Debug)]
pub struct RuntimeConfig {
    pub num_workers: usize,
    pub threads_per_worker: usize,
    /// Virtual nanoseconds accounted per task submission.
    pub sched_overhead_ns: u64,
    /// Bytes per second for the virtual transfer clock; `None` is unlimited.
    pub bandwidth_bytes_per_sec: Option<u64>,
    /// Virtual nanoseconds added per transfer.
    pub latency_ns: u64,
    /// Additionally sleep `sched_overhead_ns` of real time per submission.
    pub inject_real_overhead: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            num_workers: 1,
            threads_per_worker: 1,
            sched_overhead_ns: 0,
            bandwidth_bytes_per_sec: None,
            latency_ns: 0,
            inject_real_overhead: false,
        }
    }
}

impl RuntimeConfig {
    pub fn workers(num_workers: usize) -> Self {
        Self {
            num_workers,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_workers == 0 {
            return Err(Error::Startup("num_workers must be at least 1".into()));
        }
        if self.threads_per_worker == 0 {
            return Err(Error::Startup(
                "threads_per_worker must be at least 1".into(),
            ));
        }
        if self.bandwidth_bytes_per_sec == Some(0) {
            return Err(Error::Startup(
                "bandwidth must be positive or unlimited".into(),
            ));
        }
        Ok(())
    }
}

/// Task body: pure function from resolved input payloads to one payload.
pub type TaskFn = Box<dyn FnOnce(&[Arc<Value>]) -> std::result::Result<Value, String> + Send>;

struct Job {
    worker: WorkerId,
    func: TaskFn,
    inputs: Vec<Arc<Value>>,
    future: Arc<FutureInner>,
}

struct Shared {
    config: RuntimeConfig,
    directory: Mutex<HashMap<u64, (WorkerId, u64)>>,
    stores: Vec<Mutex<HashMap<u64, Arc<Value>>>>,
    next_data_id: AtomicU64,
    next_task_id: AtomicU64,
    round_robin: AtomicU64,
    metrics: MetricsInner,
}

impl Shared {
    fn store_value(&self, worker: WorkerId, value: Value) -> DataRef {
        let id = self.next_data_id.fetch_add(1, Ordering::Relaxed);
        let size = value.size_bytes();
        self.stores[worker.0]
            .lock()
            .unwrap()
            .insert(id, Arc::new(value));
        self.directory.lock().unwrap().insert(id, (worker, size));
        DataRef {
            id,
            owner: worker,
            size_bytes: size,
        }
    }
}

struct WorkerPool {
    sender: Sender<Option<Job>>,
    threads: Vec<JoinHandle<()>>,
}

/// The coordinator-side handle; see the module docs for the model.
pub struct Runtime {
    shared: Arc<Shared>,
    workers: Vec<WorkerPool>,
}

fn worker_loop(shared: Arc<Shared>, rx: Arc<Mutex<Receiver<Option<Job>>>>) {
    loop {
        let job = match rx.lock().unwrap().recv() {
            Ok(Some(job)) => job,
            _ => return,
        };
        job.future.set_running();
        let inputs = job.inputs;
        let func = job.func;
        let outcome = catch_unwind(AssertUnwindSafe(move || func(&inputs)));
        match outcome {
            Ok(Ok(value)) => {
                let r = shared.store_value(job.worker, value);
                job.future.set_done(r);
            }
            Ok(Err(cause)) => job.future.set_failed(cause),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "task panicked".into());
                job.future.set_failed(format!("panic: {msg}"));
            }
        }
    }
}

impl Runtime {
    /// Spin up `num_workers` executors with empty stores and zeroed metrics.
    pub fn start(config: RuntimeConfig) -> Result<Self> {
        config.validate()?;
        let shared = Arc::new(Shared {
            stores: (0..config.num_workers)
                .map(|_| Mutex::new(HashMap::new()))
                .collect(),
            directory: Mutex::new(HashMap::new()),
            next_data_id: AtomicU64::new(0),
            next_task_id: AtomicU64::new(0),
            round_robin: AtomicU64::new(0),
            metrics: MetricsInner::default(),
            config,
        });
        let mut workers = Vec::with_capacity(shared.config.num_workers);
        for _ in 0..shared.config.num_workers {
            let (tx, rx) = channel::<Option<Job>>();
            let rx = Arc::new(Mutex::new(rx));
            let threads = (0..shared.config.threads_per_worker)
                .map(|_| {
                    let shared = shared.clone();
                    let rx = rx.clone();
                    thread::Builder::new()
                        .name("spliter-worker".into())
                        .spawn(move || worker_loop(shared, rx))
                        .map_err(|e| Error::Startup(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            workers.push(WorkerPool {
                sender: tx,
                threads,
            });
        }
        Ok(Self { shared, workers })
    }

    pub fn config(&self) -> &RuntimeConfig {
        &self.shared.config
    }

    pub fn num_workers(&self) -> usize {
        self.shared.config.num_workers
    }

    pub fn worker_ids(&self) -> impl Iterator<Item = WorkerId> {
        (0..self.num_workers()).map(WorkerId)
    }

    fn check_worker(&self, w: WorkerId) -> Result<()> {
        if w.0 >= self.num_workers() {
            return Err(Error::UnknownWorker(w.0));
        }
        Ok(())
    }

    /// Store a value in a worker's store. No transfer is counted.
    pub fn put(&self, value: Value, worker: WorkerId) -> Result<DataRef> {
        self.check_worker(worker)?;
        Ok(self.shared.store_value(worker, value))
    }

    /// Current owner of each ref, in input order.
    pub fn who_has(&self, refs: &[DataRef]) -> Result<Vec<WorkerId>> {
        let dir = self.shared.directory.lock().unwrap();
        refs.iter()
            .map(|r| {
                dir.get(&r.id)
                    .map(|(owner, _)| *owner)
                    .ok_or(Error::DanglingRef(r.id))
            })
            .collect()
    }

    /// Read a value without moving it or counting anything. Coordinator-side
    /// inspection only (checksums, array assembly, oracles).
    pub fn peek(&self, r: DataRef) -> Result<Arc<Value>> {
        let owner = {
            let dir = self.shared.directory.lock().unwrap();
            dir.get(&r.id).map(|(o, _)| *o).ok_or(Error::DanglingRef(r.id))?
        };
        let store = self.shared.stores[owner.0].lock().unwrap();
        store.get(&r.id).cloned().ok_or(Error::DanglingRef(r.id))
    }

    fn virtual_transfer_ns(&self, bytes: u64) -> u64 {
        let cfg = &self.shared.config;
        let byte_ns = match cfg.bandwidth_bytes_per_sec {
            None => 0,
            Some(bw) => ((bytes as u128 * 1_000_000_000) / bw as u128) as u64,
        };
        cfg.latency_ns + byte_ns
    }

    /// Count a transfer of `bytes` without moving any stored value. Used by
    /// operations that model their movement explicitly (rechunk assembly).
    pub(crate) fn account_transfer(&self, bytes: u64) {
        self.shared
            .metrics
            .count_transfer(bytes, self.virtual_transfer_ns(bytes));
    }

    /// Move a value to `dst`. Same-owner transfers are free no-ops.
    pub fn transfer(&self, r: DataRef, dst: WorkerId) -> Result<DataRef> {
        self.check_worker(dst)?;
        let mut dir = self.shared.directory.lock().unwrap();
        let (owner, size) = *dir.get(&r.id).ok_or(Error::DanglingRef(r.id))?;
        if owner == dst {
            return Ok(DataRef {
                id: r.id,
                owner,
                size_bytes: size,
            });
        }
        let value = self.shared.stores[owner.0]
            .lock()
            .unwrap()
            .remove(&r.id)
            .ok_or(Error::DanglingRef(r.id))?;
        self.shared.stores[dst.0].lock().unwrap().insert(r.id, value);
        dir.insert(r.id, (dst, size));
        drop(dir);
        self.shared
            .metrics
            .count_transfer(size, self.virtual_transfer_ns(size));
        Ok(DataRef {
            id: r.id,
            owner: dst,
            size_bytes: size,
        })
    }

    /// Worker owning the most input bytes; ties go to the lowest id. Empty
    /// input rotates round-robin over the workers in submission order.
    pub fn locality_schedule(&self, inputs: &[DataRef]) -> WorkerId {
        let mut per_worker: Vec<u64> = vec![0; self.num_workers()];
        let mut seen = false;
        {
            let dir = self.shared.directory.lock().unwrap();
            for r in inputs {
                if let Some((owner, size)) = dir.get(&r.id) {
                    per_worker[owner.0] += size;
                    seen = true;
                }
            }
        }
        if !seen {
            let n = self.shared.round_robin.fetch_add(1, Ordering::Relaxed);
            return WorkerId((n % self.num_workers() as u64) as usize);
        }
        let mut best = WorkerId(0);
        let mut best_bytes = 0u64;
        let mut found = false;
        let dir = self.shared.directory.lock().unwrap();
        for r in inputs {
            if let Some((owner, _)) = dir.get(&r.id) {
                let bytes = per_worker[owner.0];
                if !found || bytes > best_bytes || (bytes == best_bytes && *owner < best) {
                    best = *owner;
                    best_bytes = bytes;
                    found = true;
                }
            }
        }
        best
    }

    /// Submit a task. Inputs not resident on the chosen worker are moved
    /// there first (each one counted as exactly one transfer); resident
    /// inputs count as locality hits. The submission itself is always
    /// counted, even when it fails to enqueue.
    pub fn submit(
        &self,
        kind: &str,
        inputs: &[DataRef],
        hint: Option<WorkerId>,
        func: TaskFn,
    ) -> TaskFuture {
        let cfg = &self.shared.config;
        let task_id = self.shared.next_task_id.fetch_add(1, Ordering::Relaxed);
        self.shared.metrics.count_task(kind, cfg.sched_overhead_ns);
        if cfg.inject_real_overhead && cfg.sched_overhead_ns > 0 {
            thread::sleep(Duration::from_nanos(cfg.sched_overhead_ns));
        }

        let (fut, inner) = TaskFuture::new(task_id, kind.to_string());

        let worker = match hint {
            Some(w) => w,
            None => self.locality_schedule(inputs),
        };
        if let Err(e) = self.check_worker(worker) {
            inner.set_failed(e.to_string());
            return fut;
        }

        // Validate all inputs up front so a dangling ref fails the task
        // before any data moves.
        if let Err(e) = self.who_has(inputs) {
            inner.set_failed(e.to_string());
            return fut;
        }

        let mut resolved = Vec::with_capacity(inputs.len());
        for r in inputs {
            let current = self.who_has(std::slice::from_ref(r)).expect("validated")[0];
            if current == worker {
                self.shared.metrics.count_locality_hit();
            } else if let Err(e) = self.transfer(*r, worker) {
                inner.set_failed(e.to_string());
                return fut;
            }
            match self.peek(*r) {
                Ok(v) => resolved.push(v),
                Err(e) => {
                    inner.set_failed(e.to_string());
                    return fut;
                }
            }
        }

        let job = Job {
            worker,
            func,
            inputs: resolved,
            future: inner.clone(),
        };
        if self.workers[worker.0].sender.send(Some(job)).is_err() {
            inner.set_failed("worker executor stopped".into());
        }
        fut
    }

    /// Copy a stored value to the coordinator, counted as one transfer of
    /// its size to the coordinator sink; the value stays on its worker.
    pub fn fetch(&self, r: DataRef) -> Result<Value> {
        let value = self.peek(r)?;
        self.account_transfer(value.size_bytes());
        Ok((*value).clone())
    }

    /// Wait for a future and [`fetch`](Self::fetch) its result.
    pub fn gather(&self, fut: &TaskFuture) -> Result<Value> {
        self.fetch(fut.wait()?)
    }

    pub fn metrics(&self) -> Metrics {
        self.shared.metrics.snapshot()
    }

    fn stop_workers(&mut self) {
        for pool in &self.workers {
            for _ in 0..pool.threads.len() {
                let _ = pool.sender.send(None);
            }
        }
        for pool in &mut self.workers {
            for t in pool.threads.drain(..) {
                let _ = t.join();
            }
        }
    }

    pub fn shutdown(mut self) {
        self.stop_workers();
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        self.stop_workers();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn incr_task() -> TaskFn {
        Box::new(|inputs| {
            let v = inputs[0].as_i64()?;
            Ok(Value::I64(v + 1))
        })
    }

    #[test]
    fn fresh_runtime_is_empty() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let m = rt.metrics();
        assert_eq!(m, Metrics::default());
        assert_eq!(rt.num_workers(), 2);
    }

    #[test]
    fn put_records_owner_and_size() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let r = rt.put(Value::F64(1.5), WorkerId(0)).unwrap();
        assert_eq!(r.owner, WorkerId(0));
        assert_eq!(r.size_bytes, 8);
        assert_eq!(rt.metrics().transfers, 0);
    }

    #[test]
    fn identical_payloads_get_distinct_ids() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let a = rt.put(Value::I64(7), WorkerId(0)).unwrap();
        let b = rt.put(Value::I64(7), WorkerId(0)).unwrap();
        assert_ne!(a.id, b.id);
    }

    #[test]
    fn put_on_unknown_worker_errors() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let err = rt.put(Value::I64(0), WorkerId(5)).unwrap_err();
        assert!(matches!(err, Error::UnknownWorker(5)));
    }

    #[test]
    fn who_has_tracks_placement() {
        let rt = Runtime::start(RuntimeConfig::workers(16)).unwrap();
        let r = rt.put(Value::I64(3), WorkerId(5)).unwrap();
        assert_eq!(rt.who_has(&[r]).unwrap(), vec![WorkerId(5)]);
        assert_eq!(rt.who_has(&[]).unwrap(), vec![]);
    }

    #[test]
    fn who_has_round_robin_placement() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let refs: Vec<DataRef> = (0..4)
            .map(|i| rt.put(Value::I64(i), WorkerId((i % 2) as usize)).unwrap())
            .collect();
        let owners = rt.who_has(&refs).unwrap();
        assert_eq!(
            owners,
            vec![WorkerId(0), WorkerId(1), WorkerId(0), WorkerId(1)]
        );
    }

    #[test]
    fn who_has_names_dangling_ref() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let bogus = DataRef {
            id: 999,
            owner: WorkerId(0),
            size_bytes: 0,
        };
        match rt.who_has(&[bogus]).unwrap_err() {
            Error::DanglingRef(id) => assert_eq!(id, 999),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn local_submit_is_a_locality_hit() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let r = rt.put(Value::I64(41), WorkerId(0)).unwrap();
        let fut = rt.submit("incr", &[r], Some(WorkerId(0)), incr_task());
        let out = rt.gather(&fut).unwrap();
        assert!(matches!(out, Value::I64(42)));
        let m = rt.metrics();
        assert_eq!(m.locality_hits, 1);
        // The only transfer is the gather copy to the coordinator.
        assert_eq!(m.transfers, 1);
        assert_eq!(m.bytes_transferred, 8);
    }

    #[test]
    fn remote_submit_moves_the_input() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let r = rt.put(Value::I64(41), WorkerId(0)).unwrap();
        let fut = rt.submit("incr", &[r], Some(WorkerId(1)), incr_task());
        let result_ref = fut.wait().unwrap();
        assert_eq!(result_ref.owner, WorkerId(1));
        assert_eq!(rt.who_has(&[r]).unwrap(), vec![WorkerId(1)]);
        let m = rt.metrics();
        assert_eq!(m.locality_hits, 0);
        assert_eq!(m.transfers, 1);
        assert_eq!(m.bytes_transferred, 8);
    }

    #[test]
    fn overhead_is_exact_arithmetic() {
        let cfg = RuntimeConfig {
            num_workers: 1,
            sched_overhead_ns: 1000,
            ..Default::default()
        };
        let rt = Runtime::start(cfg).unwrap();
        let mut futs = Vec::new();
        for _ in 0..100 {
            let r = rt.put(Value::I64(0), WorkerId(0)).unwrap();
            futs.push(rt.submit("incr", &[r], None, incr_task()));
        }
        for f in futs {
            f.wait().unwrap();
        }
        let m = rt.metrics();
        assert_eq!(m.tasks_submitted, 100);
        assert_eq!(m.accounted_overhead_ns, 100_000);
    }

    #[test]
    fn locality_schedule_picks_max_bytes_then_lowest_id() {
        let rt = Runtime::start(RuntimeConfig::workers(4)).unwrap();
        let a = rt
            .put(Value::U64s(vec![0; 10]), WorkerId(3))
            .unwrap();
        assert_eq!(rt.locality_schedule(&[a]), WorkerId(3));

        let small = rt.put(Value::U64s(vec![0; 10]), WorkerId(0)).unwrap();
        let big = rt.put(Value::U64s(vec![0; 20]), WorkerId(1)).unwrap();
        assert_eq!(rt.locality_schedule(&[small, big]), WorkerId(1));

        let t1 = rt.put(Value::U64s(vec![0; 10]), WorkerId(2)).unwrap();
        let t2 = rt.put(Value::U64s(vec![0; 10]), WorkerId(1)).unwrap();
        assert_eq!(rt.locality_schedule(&[t1, t2]), WorkerId(1));
    }

    #[test]
    fn empty_inputs_round_robin() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let picks: Vec<usize> = (0..4).map(|_| rt.locality_schedule(&[]).0).collect();
        assert_eq!(picks, vec![0, 1, 0, 1]);
    }

    #[test]
    fn transfer_to_self_is_free() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let r = rt.put(Value::I64(1), WorkerId(0)).unwrap();
        let r2 = rt.transfer(r, WorkerId(0)).unwrap();
        assert_eq!(r2.owner, WorkerId(0));
        assert_eq!(rt.metrics().bytes_transferred, 0);
        assert_eq!(rt.metrics().transfers, 0);
    }

    #[test]
    fn transfer_counts_bytes_and_virtual_time() {
        let cfg = RuntimeConfig {
            num_workers: 2,
            latency_ns: 1000,
            bandwidth_bytes_per_sec: Some(1_000_000_000),
            ..Default::default()
        };
        let rt = Runtime::start(cfg).unwrap();
        let r = rt
            .put(Value::U64s(vec![0; 125_000]), WorkerId(0)) // 1e6 bytes
            .unwrap();
        assert_eq!(r.size_bytes, 1_000_000);
        let moved = rt.transfer(r, WorkerId(1)).unwrap();
        assert_eq!(moved.owner, WorkerId(1));
        let m = rt.metrics();
        assert_eq!(m.bytes_transferred, 1_000_000);
        assert_eq!(m.transfers, 1);
        assert_eq!(m.virtual_transfer_ns, 1_001_000);
    }

    #[test]
    fn repeated_transfers_accumulate() {
        let rt = Runtime::start(RuntimeConfig::workers(3)).unwrap();
        let mut r = rt.put(Value::U64s(vec![0; 4]), WorkerId(0)).unwrap(); // 32 bytes
        for dst in [1, 2, 0] {
            r = rt.transfer(r, WorkerId(dst)).unwrap();
        }
        let m = rt.metrics();
        assert_eq!(m.transfers, 3);
        assert_eq!(m.bytes_transferred, 96);
    }

    #[test]
    fn gather_of_failed_task_propagates_cause() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let fut = rt.submit("boom", &[], None, Box::new(|_| Err("bad input".into())));
        match rt.gather(&fut) {
            Err(Error::TaskFailed { cause, .. }) => assert_eq!(cause, "bad input"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_input_fails_the_future_with_the_id() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let bogus = DataRef {
            id: 4242,
            owner: WorkerId(0),
            size_bytes: 8,
        };
        let fut = rt.submit("incr", &[bogus], None, incr_task());
        let err = fut.wait().unwrap_err();
        assert!(err.to_string().contains("4242"), "{err}");
        // The submission itself was still counted.
        assert_eq!(rt.metrics().tasks_submitted, 1);
    }

    #[test]
    fn chained_tasks_match_sequential_evaluation() {
        let rt = Runtime::start(RuntimeConfig::workers(2)).unwrap();
        let x = rt.put(Value::I64(10), WorkerId(0)).unwrap();
        let g = rt.submit("incr", &[x], None, incr_task());
        let g_ref = g.wait().unwrap();
        let f = rt.submit(
            "double",
            &[g_ref],
            None,
            Box::new(|inputs| Ok(Value::I64(inputs[0].as_i64()? * 2))),
        );
        let out = rt.gather(&f).unwrap();
        assert!(matches!(out, Value::I64(22)));
    }

    #[test]
    fn panicking_task_fails_cleanly() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let fut = rt.submit("panic", &[], None, Box::new(|_| panic!("kaput")));
        let err = fut.wait().unwrap_err();
        assert!(err.to_string().contains("kaput"), "{err}");
        // Runtime still works afterwards.
        let ok = rt.submit("ok", &[], None, Box::new(|_| Ok(Value::I64(1))));
        assert!(ok.wait().is_ok());
    }

    #[test]
    fn every_task_input_hits_or_transfers_once() {
        let rt = Runtime::start(RuntimeConfig::workers(4)).unwrap();
        let mut rng = crate::rng::Rng64::new(99);
        let mut total_inputs = 0u64;
        for round in 0..50 {
            let n_inputs = 1 + rng.next_index(3);
            let refs: Vec<DataRef> = (0..n_inputs)
                .map(|_| {
                    rt.put(Value::I64(round), WorkerId(rng.next_index(4)))
                        .unwrap()
                })
                .collect();
            total_inputs += refs.len() as u64;
            let hint = if rng.next_index(2) == 0 {
                Some(WorkerId(rng.next_index(4)))
            } else {
                None
            };
            rt.submit("noop", &refs, hint, Box::new(|_| Ok(Value::I64(0))))
                .wait()
                .unwrap();
        }
        let m = rt.metrics();
        assert_eq!(m.locality_hits + m.transfers, total_inputs);
    }

    #[test]
    fn real_overhead_injection_sleeps() {
        let cfg = RuntimeConfig {
            num_workers: 1,
            sched_overhead_ns: 2_000_000, // 2 ms
            inject_real_overhead: true,
            ..Default::default()
        };
        let rt = Runtime::start(cfg).unwrap();
        let started = std::time::Instant::now();
        for _ in 0..10 {
            rt.submit("noop", &[], None, Box::new(|_| Ok(Value::I64(0))))
                .wait()
                .unwrap();
        }
        assert!(started.elapsed() >= Duration::from_millis(20));
        assert_eq!(rt.metrics().accounted_overhead_ns, 20_000_000);
    }

    #[test]
    fn state_transitions_reach_done() {
        let rt = Runtime::start(RuntimeConfig::workers(1)).unwrap();
        let fut = rt.submit("ok", &[], None, Box::new(|_| Ok(Value::I64(5))));
        fut.wait().unwrap();
        assert_eq!(fut.state(), FutureState::Done);
    }
}
