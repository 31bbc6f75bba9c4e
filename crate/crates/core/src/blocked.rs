//! Blocked 2-D datasets: creation, deterministic generation, placement.
//!
//! An array is an ordered list of row-blocks, each stored as one value on
//! exactly one worker. Block `i` covers global rows
//! `[i * block_rows, min((i + 1) * block_rows, n_rows))`; only the last
//! block may be ragged. Row content is a function of `(seed, global row)`
//! alone, so re-blocking the same dataset never changes its checksum.

use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::Rng64;
use crate::runtime::{Block, DataRef, Runtime, Value, WorkerId};

/// How blocks map onto workers at creation time.
#[derive(Clone, Debug)]
pub enum PlacementPolicy {
    RoundRobin,
    SeededRandom(u64),
    Explicit(Vec<WorkerId>),
}

/// Synthetic dataset families.
#[derive(Clone, Debug)]
pub enum Generator {
    /// Every coordinate uniform in `[0, 1)`.
    UniformCube,
    /// `k` Gaussian blobs of deviation `spread`; row `r` belongs to blob
    /// `r % k`. Blob 0 sits at the origin and blob `i > 0` at `10 * e_(i-1)`,
    /// the corners of a simplex scaled to edge-neighbor distance 10.
    GaussianBlobs { k: usize, spread: f64 },
    /// `+1` / `-1` by row parity: the label column matching a two-blob
    /// points array of the same seed and blocking.
    BlobLabels,
}

/// Values of global row `r`, independent of any blocking.
pub fn generate_row(gen: &Generator, seed: u64, row: usize, dims: usize) -> Vec<f64> {
    let mut rng = Rng64::new(seed ^ (row as u64 + 1));
    match gen {
        Generator::UniformCube => (0..dims).map(|_| rng.next_f64()).collect(),
        Generator::GaussianBlobs { k, spread } => {
            let blob = row % k;
            let mut out = Vec::with_capacity(dims);
            while out.len() < dims {
                let (a, b) = rng.next_gaussian_pair();
                out.push(a);
                if out.len() < dims {
                    out.push(b);
                }
            }
            for (d, v) in out.iter_mut().enumerate() {
                *v *= spread;
                if blob > 0 && d == blob - 1 {
                    *v += 10.0;
                }
            }
            out
        }
        Generator::BlobLabels => {
            let label = if row.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut out = vec![0.0; dims];
            out[0] = label;
            out
        }
    }
}

/// A dataset split into row-blocks, each placed on one worker.
#[derive(Clone, Debug)]
pub struct BlockedArray {
    pub n_rows: usize,
    pub dims: usize,
    pub block_rows: usize,
    /// One ref per block, in global row order.
    pub blocks: Vec<DataRef>,
}

impl BlockedArray {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Global row range `[start, end)` of block `i`.
    pub fn block_row_range(&self, i: usize) -> (usize, usize) {
        let start = i * self.block_rows;
        let end = ((i + 1) * self.block_rows).min(self.n_rows);
        (start, end)
    }

    pub fn rows_in_block(&self, i: usize) -> usize {
        let (start, end) = self.block_row_range(i);
        end - start
    }

    /// Bytes of the whole dataset.
    pub fn total_bytes(&self) -> u64 {
        (self.n_rows * self.dims * 8) as u64
    }
}

fn placement(policy: &PlacementPolicy, n_blocks: usize, num_workers: usize) -> Result<Vec<WorkerId>> {
    match policy {
        PlacementPolicy::RoundRobin => {
            Ok((0..n_blocks).map(|i| WorkerId(i % num_workers)).collect())
        }
        PlacementPolicy::SeededRandom(seed) => {
            let mut rng = Rng64::new(*seed);
            Ok((0..n_blocks)
                .map(|_| WorkerId(rng.next_index(num_workers)))
                .collect())
        }
        PlacementPolicy::Explicit(owners) => {
            if owners.len() != n_blocks {
                return Err(Error::InvalidArgument(format!(
                    "explicit placement names {} blocks, array has {n_blocks}",
                    owners.len()
                )));
            }
            Ok(owners.clone())
        }
    }
}

/// Generate and place a blocked array. Values depend only on
/// `(gen, seed, row)`; the policy decides placement only.
pub fn create_array(
    rt: &Runtime,
    n_rows: usize,
    dims: usize,
    block_rows: usize,
    policy: &PlacementPolicy,
    gen: &Generator,
    seed: u64,
) -> Result<BlockedArray> {
    if n_rows == 0 || dims == 0 {
        return Err(Error::InvalidArgument(
            "array needs n_rows >= 1 and dims >= 1".into(),
        ));
    }
    if block_rows == 0 || block_rows > n_rows {
        return Err(Error::InvalidArgument(format!(
            "block_rows must be in [1, {n_rows}], got {block_rows}"
        )));
    }
    let n_blocks = n_rows.div_ceil(block_rows);
    let owners = placement(policy, n_blocks, rt.num_workers())?;
    let mut blocks = Vec::with_capacity(n_blocks);
    for (i, owner) in owners.iter().enumerate() {
        let start = i * block_rows;
        let end = ((i + 1) * block_rows).min(n_rows);
        let mut data = Vec::with_capacity((end - start) * dims);
        for r in start..end {
            data.extend(generate_row(gen, seed, r, dims));
        }
        let block = Block::new(end - start, dims, data);
        blocks.push(rt.put(Value::Block(block), *owner)?);
    }
    Ok(BlockedArray {
        n_rows,
        dims,
        block_rows,
        blocks,
    })
}

/// Current owner of every block, in block-index order.
pub fn block_locations(rt: &Runtime, arr: &BlockedArray) -> Result<Vec<WorkerId>> {
    rt.who_has(&arr.blocks)
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

#[inline]
fn fnv1a_f64(mut hash: u64, v: f64) -> u64 {
    for b in v.to_bits().to_le_bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Order-sensitive FNV-1a digest over the bit patterns of all elements in
/// global row order. Blocking does not affect it; element order does.
pub fn checksum(rt: &Runtime, arr: &BlockedArray) -> Result<u64> {
    let mut hash = FNV_OFFSET;
    for r in &arr.blocks {
        let value = rt.peek(*r)?;
        let block = value
            .as_block()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for &v in &block.data {
            hash = fnv1a_f64(hash, v);
        }
    }
    Ok(hash)
}

/// Digest with the same scheme over an arbitrary f64 sequence.
pub fn checksum_f64s(values: &[f64]) -> u64 {
    values.iter().fold(FNV_OFFSET, |h, &v| fnv1a_f64(h, v))
}

/// Digest with the same scheme over u64 values (integer results).
pub fn checksum_u64s(values: &[u64]) -> u64 {
    values.iter().fold(FNV_OFFSET, |h, &v| {
        v.to_le_bytes()
            .iter()
            .fold(h, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
    })
}

/// Debug dump: one CSV line per point, in global row order.
pub fn dump_csv<W: Write>(rt: &Runtime, arr: &BlockedArray, out: &mut W) -> Result<()> {
    for r in &arr.blocks {
        let value = rt.peek(*r)?;
        let block = value
            .as_block()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for row in 0..block.rows {
            let fields: Vec<String> = block.row(row).iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    Ok(())
}
