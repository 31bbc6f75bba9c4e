//! Deterministic counters that stand in for wall-clock measurements.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

#[derive(Default)]
pub(crate) struct MetricsInner {
    pub tasks_submitted: AtomicU64,
    pub bytes_transferred: AtomicU64,
    pub transfers: AtomicU64,
    pub locality_hits: AtomicU64,
    pub accounted_overhead_ns: AtomicU64,
    pub virtual_transfer_ns: AtomicU64,
    pub tasks_by_kind: Mutex<BTreeMap<String, u64>>,
}

impl MetricsInner {
    pub fn count_task(&self, kind: &str, sched_overhead_ns: u64) {
        self.tasks_submitted.fetch_add(1, Ordering::Relaxed);
        self.accounted_overhead_ns
            .fetch_add(sched_overhead_ns, Ordering::Relaxed);
        let mut map = self.tasks_by_kind.lock().unwrap();
        *map.entry(kind.to_string()).or_insert(0) += 1;
    }

    pub fn count_transfer(&self, bytes: u64, virtual_ns: u64) {
        self.bytes_transferred.fetch_add(bytes, Ordering::Relaxed);
        self.transfers.fetch_add(1, Ordering::Relaxed);
        self.virtual_transfer_ns
            .fetch_add(virtual_ns, Ordering::Relaxed);
    }

    pub fn count_locality_hit(&self) {
        self.locality_hits.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> Metrics {
        Metrics {
            tasks_submitted: self.tasks_submitted.load(Ordering::Relaxed),
            tasks_by_kind: self.tasks_by_kind.lock().unwrap().clone(),
            bytes_transferred: self.bytes_transferred.load(Ordering::Relaxed),
            transfers: self.transfers.load(Ordering::Relaxed),
            locality_hits: self.locality_hits.load(Ordering::Relaxed),
            accounted_overhead_ns: self.accounted_overhead_ns.load(Ordering::Relaxed),
            virtual_transfer_ns: self.virtual_transfer_ns.load(Ordering::Relaxed),
        }
    }
}

/// Point-in-time copy of every counter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub tasks_submitted: u64,
    pub tasks_by_kind: BTreeMap<String, u64>,
    pub bytes_transferred: u64,
    pub transfers: u64,
    pub locality_hits: u64,
    pub accounted_overhead_ns: u64,
    pub virtual_transfer_ns: u64,
}

impl Metrics {
    /// Count of tasks submitted under one kind tag.
    pub fn kind_count(&self, kind: &str) -> u64 {
        self.tasks_by_kind.get(kind).copied().unwrap_or(0)
    }
}
