//! Task-based distributed-computing runtime at desk scale: blocked 2-D
//! arrays placed across in-process workers, a locality-aware split-iteration
//! mechanism that groups co-located blocks into logical partitions, a
//! rechunk operation that materializes a new blocking for comparison, and
//! four benchmark applications (histogram, k-means, cascade SVM, k-nearest
//! neighbors) runnable per-block, per-partition, or post-rechunk.
//!
//! Everything is deterministic by construction: datasets come from a
//! counter-based generator, reductions run in a fixed order, and costs are
//! tracked as exact counters (tasks, bytes moved, locality hits, virtual
//! nanoseconds) rather than wall-clock time.

pub mod apps;
pub mod bench;
pub mod blocked;
pub mod error;
pub mod kernels;
pub mod rechunk;
pub mod rng;
pub mod runtime;
pub mod spliter;

pub use error::{Error, Result};
pub use runtime::{DataRef, Metrics, Runtime, RuntimeConfig, TaskFuture, Value, WorkerId};
