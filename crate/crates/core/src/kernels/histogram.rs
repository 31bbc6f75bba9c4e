//! Dense n-dimensional histogram kernel.

use crate::error::{Error, Result};

/// Binning description shared by every partial histogram of a run.
#[derive(Clone, Debug)]
pub struct HistogramSpec {
    pub dims: usize,
    pub bins_per_dim: usize,
    /// Inclusive lower edge per dimension.
    pub lo: Vec<f64>,
    /// Upper edge per dimension; a point exactly on it lands in the last bin.
    pub hi: Vec<f64>,
}

impl HistogramSpec {
    /// Uniform `[0, 1)` range on every dimension.
    pub fn unit(dims: usize, bins_per_dim: usize) -> Self {
        Self {
            dims,
            bins_per_dim,
            lo: vec![0.0; dims],
            hi: vec![1.0; dims],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 || self.bins_per_dim == 0 {
            return Err(Error::InvalidArgument(
                "histogram needs dims >= 1 and bins_per_dim >= 1".into(),
            ));
        }
        if self.lo.len() != self.dims || self.hi.len() != self.dims {
            return Err(Error::InvalidArgument(
                "histogram range arity does not match dims".into(),
            ));
        }
        for d in 0..self.dims {
            if self.lo[d] >= self.hi[d] {
                return Err(Error::InvalidArgument(format!(
                    "histogram range on dim {d} is empty"
                )));
            }
        }
        Ok(())
    }

    /// Total cells of the dense count tensor.
    pub fn cells(&self) -> usize {
        self.bins_per_dim.pow(self.dims as u32)
    }
}

/// Dense count tensor plus the number of out-of-range points it ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub discarded: u64,
}

impl Histogram {
    pub fn zeros(spec: &HistogramSpec) -> Self {
        Self {
            counts: vec![0; spec.cells()],
            discarded: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of a row-major `rows x spec.dims` block.
///
/// Bin selection per dimension is `floor((p - lo) / (hi - lo) * bins)`,
/// with `p == hi` clamped into the last bin. Points outside `[lo, hi]`
/// on any dimension are discarded and counted in `discarded`.
pub fn histogramdd(block: &[f64], spec: &HistogramSpec) -> Histogram {
    debug_assert_eq!(block.len() % spec.dims, 0);
    let bins = spec.bins_per_dim;
    let mut out = Histogram::zeros(spec);
    'rows: for row in block.chunks_exact(spec.dims) {
        let mut flat = 0usize;
        for (d, &p) in row.iter().enumerate() {
            if p < spec.lo[d] || p > spec.hi[d] {
                out.discarded += 1;
                continue 'rows;
            }
            let scaled = (p - spec.lo[d]) / (spec.hi[d] - spec.lo[d]) * bins as f64;
            let bin = (scaled as usize).min(bins - 1);
            flat = flat * bins + bin;
        }
        out.counts[flat] += 1;
    }
    out
}

/// Element-wise sum of partial histograms. Shapes must match.
pub fn sum_counts(parts: &[&Histogram]) -> Histogram {
    let mut it = parts.iter();
    let first = it.next().expect("sum_counts over at least one partial");
    let mut acc = (*first).clone();
    for p in it {
        assert_eq!(p.counts.len(), acc.counts.len(), "histogram shape mismatch");
        for (a, b) in acc.counts.iter_mut().zip(p.counts.iter()) {
            *a += b;
        }
        acc.discarded += p.discarded;
    }
    acc
}
