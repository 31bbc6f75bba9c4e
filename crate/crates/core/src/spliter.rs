//! Logical, worker-local partitions of a blocked array.
//!
//! `split` asks the runtime where every block lives (one batch query) and
//! groups co-located blocks into [`Partition`]s without reading, copying, or
//! moving a single payload byte. Tasks submitted per partition instead of
//! per block keep their locality while the task count drops to the number
//! of partitions.
//!
//! Grouping loses the original collection order, so each partition carries
//! the global block indexes ([`Partition::get_indexes`]) and the global row
//! indexes ([`Partition::get_item_indexes`]) of its content.

use crate::blocked::{block_locations, BlockedArray};
use crate::error::{Error, Result};
use crate::runtime::{DataRef, Runtime, WorkerId};

/// Ordered group of blocks that shared a worker when `split` ran.
#[derive(Clone, Debug)]
pub struct Partition {
    pub worker: WorkerId,
    /// Refs of the member blocks, ascending by global block index.
    pub block_refs: Vec<DataRef>,
    /// Global block index of each ref.
    pub block_indexes: Vec<usize>,
    /// Global row range `[start, end)` covered by each ref.
    pub item_ranges: Vec<(usize, usize)>,
}

impl Partition {
    /// Global block indexes, ascending.
    pub fn get_indexes(&self) -> &[usize] {
        &self.block_indexes
    }

    /// Global row index of every point, block by block, rows ascending.
    pub fn get_item_indexes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_items());
        for &(start, end) in &self.item_ranges {
            out.extend(start..end);
        }
        out
    }

    pub fn n_blocks(&self) -> usize {
        self.block_refs.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ranges.iter().map(|(s, e)| e - s).sum()
    }
}

/// Group the array's blocks into per-worker partitions, at most
/// `partitions_per_worker` per worker, without touching any payload.
///
/// Workers owning no blocks yield no partitions and no partition is ever
/// empty, so the result covers every block exactly once. Partitions are
/// ordered by `(worker id, sub-group index)`; inside one worker the blocks
/// are divided into contiguous runs whose sizes differ by at most one.
pub fn split(
    rt: &Runtime,
    arr: &BlockedArray,
    partitions_per_worker: usize,
) -> Result<Vec<Partition>> {
    if partitions_per_worker == 0 {
        return Err(Error::InvalidArgument(
            "partitions_per_worker must be at least 1".into(),
        ));
    }
    let owners = block_locations(rt, arr)?;

    // Ascending block index per worker, workers in id order.
    let mut by_worker: Vec<Vec<usize>> = vec![Vec::new(); rt.num_workers()];
    for (block_idx, owner) in owners.iter().enumerate() {
        by_worker[owner.0].push(block_idx);
    }

    let mut partitions = Vec::new();
    for (worker, indexes) in by_worker.into_iter().enumerate() {
        if indexes.is_empty() {
            continue;
        }
        let groups = partitions_per_worker.min(indexes.len());
        let base = indexes.len() / groups;
        let extra = indexes.len() % groups;
        let mut offset = 0;
        for g in 0..groups {
            let len = base + usize::from(g < extra);
            let members = &indexes[offset..offset + len];
            offset += len;
            partitions.push(Partition {
                worker: WorkerId(worker),
                block_refs: members.iter().map(|&i| arr.blocks[i]).collect(),
                block_indexes: members.to_vec(),
                item_ranges: members.iter().map(|&i| arr.block_row_range(i)).collect(),
            });
        }
    }
    Ok(partitions)
}
