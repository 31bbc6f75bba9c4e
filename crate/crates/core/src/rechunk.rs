//! Materialize a blocked array under a different block size.
//!
//! This is the competitor to `split`: it really builds a new array, paying
//! for every source block that has to reach a foreign destination worker.
//! Movement is modeled at whole-source-block granularity: a source block
//! overlapping destination blocks on two different foreign workers is
//! counted once per destination. Destination blocks go round-robin over the
//! workers starting at worker 0.

use crate::blocked::{block_locations, BlockedArray};
use crate::error::{Error, Result};
use crate::runtime::{Block, Runtime, Value, WorkerId};

/// Rows per block that give one block per worker thread:
/// `ceil(n_rows / (num_workers * threads_per_worker))`.
pub fn balanced_block_rows(rt: &Runtime, n_rows: usize) -> usize {
    let slots = rt.num_workers() * rt.config().threads_per_worker;
    n_rows.div_ceil(slots).max(1)
}

/// Build a new array with `new_block_rows` rows per block and the same
/// global row content.
///
/// Rechunking to the current block size is an exact no-op: the same blocks
/// come back and no counter moves.
pub fn rechunk(rt: &Runtime, arr: &BlockedArray, new_block_rows: usize) -> Result<BlockedArray> {
    if new_block_rows == 0 || new_block_rows > arr.n_rows {
        return Err(Error::InvalidArgument(format!(
            "new_block_rows must be in [1, {}], got {new_block_rows}",
            arr.n_rows
        )));
    }
    if new_block_rows == arr.block_rows {
        return Ok(arr.clone());
    }

    let dims = arr.dims;
    let source_owners = block_locations(rt, arr)?;
    let n_dest = arr.n_rows.div_ceil(new_block_rows);
    let mut dest_blocks = Vec::with_capacity(n_dest);

    for d in 0..n_dest {
        let dest_worker = WorkerId(d % rt.num_workers());
        let ds = d * new_block_rows;
        let de = ((d + 1) * new_block_rows).min(arr.n_rows);
        let mut data = Vec::with_capacity((de - ds) * dims);

        let first_src = ds / arr.block_rows;
        let last_src = (de - 1) / arr.block_rows;
        for (s, owner) in source_owners
            .iter()
            .enumerate()
            .take(last_src + 1)
            .skip(first_src)
        {
            let (ss, se) = arr.block_row_range(s);
            if *owner != dest_worker {
                let src_bytes = (arr.rows_in_block(s) * dims * 8) as u64;
                rt.account_transfer(src_bytes);
            }
            let value = rt.peek(arr.blocks[s])?;
            let block = value
                .as_block()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let lo = ds.max(ss) - ss;
            let hi = de.min(se) - ss;
            data.extend_from_slice(&block.data[lo * dims..hi * dims]);
        }

        let block = Block::new(de - ds, dims, data);
        dest_blocks.push(rt.put(Value::Block(block), dest_worker)?);
    }

    Ok(BlockedArray {
        n_rows: arr.n_rows,
        dims,
        block_rows: new_block_rows,
        blocks: dest_blocks,
    })
}
