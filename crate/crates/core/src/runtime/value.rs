//! Payload values held in worker stores and passed between tasks.

use crate::kernels::{Histogram, KdTree, PartialSums, SvmModel};

/// Dense row-major matrix of 64-bit floats; the unit of data distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub rows: usize,
    pub dims: usize,
    pub data: Vec<f64>,
}

impl Block {
    pub fn new(rows: usize, dims: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * dims, data.len());
        Self { rows, dims, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dims..(r + 1) * self.dims]
    }
}

/// One Lloyd partial: per-cluster accumulators plus the assignment inertia.
#[derive(Clone, Debug)]
pub struct KMeansUpdate {
    pub partial: PartialSums,
    pub inertia: f64,
}

/// A lookup tree over some rows of the fit dataset, with the global row id
/// of every tree-local point.
#[derive(Clone, Debug)]
pub struct KdTreeFit {
    pub tree: KdTree,
    pub global_ids: Vec<u64>,
}

/// Per-query-row candidate lists in global row ids, plus the distance
/// evaluations spent producing them.
#[derive(Clone, Debug)]
pub struct KnnHits {
    pub rows: Vec<Vec<(f64, u64)>>,
    pub evals: u64,
}

/// Everything a task can consume or produce.
#[derive(Clone, Debug)]
pub enum Value {
    I64(i64),
    F64(f64),
    U64s(Vec<u64>),
    Block(Block),
    Histogram(Histogram),
    KMeansUpdate(KMeansUpdate),
    Svm(SvmModel),
    KdTreeFit(KdTreeFit),
    KnnHits(KnnHits),
}

impl Value {
    /// Accounted size: the bytes a transfer of this value moves.
    pub fn size_bytes(&self) -> u64 {
        match self {
            Value::I64(_) | Value::F64(_) => 8,
            Value::U64s(v) => 8 * v.len() as u64,
            Value::Block(b) => 8 * b.data.len() as u64,
            Value::Histogram(h) => 8 * h.counts.len() as u64 + 8,
            Value::KMeansUpdate(u) => {
                8 * (u.partial.sums.len() + u.partial.counts.len()) as u64 + 8
            }
            Value::Svm(m) => {
                8 * (m.support_points.len()
                    + m.support_labels.len()
                    + m.alphas.len()
                    + m.support_global_indexes.len()) as u64
                    + 8
            }
            Value::KdTreeFit(f) => f.tree.size_bytes() + 8 * f.global_ids.len() as u64,
            Value::KnnHits(h) => {
                16 * h.rows.iter().map(|r| r.len() as u64).sum::<u64>() + 8
            }
        }
    }

    pub fn as_block(&self) -> Result<&Block, String> {
        match self {
            Value::Block(b) => Ok(b),
            other => Err(format!("expected Block payload, got {}", other.kind_name())),
        }
    }

    pub fn as_histogram(&self) -> Result<&Histogram, String> {
        match self {
            Value::Histogram(h) => Ok(h),
            other => Err(format!(
                "expected Histogram payload, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn as_kmeans_update(&self) -> Result<&KMeansUpdate, String> {
        match self {
            Value::KMeansUpdate(u) => Ok(u),
            other => Err(format!(
                "expected KMeansUpdate payload, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn as_svm(&self) -> Result<&SvmModel, String> {
        match self {
            Value::Svm(m) => Ok(m),
            other => Err(format!("expected Svm payload, got {}", other.kind_name())),
        }
    }

    pub fn as_kdtree_fit(&self) -> Result<&KdTreeFit, String> {
        match self {
            Value::KdTreeFit(f) => Ok(f),
            other => Err(format!(
                "expected KdTreeFit payload, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn as_knn_hits(&self) -> Result<&KnnHits, String> {
        match self {
            Value::KnnHits(h) => Ok(h),
            other => Err(format!(
                "expected KnnHits payload, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn as_u64s(&self) -> Result<&[u64], String> {
        match self {
            Value::U64s(v) => Ok(v),
            other => Err(format!("expected U64s payload, got {}", other.kind_name())),
        }
    }

    pub fn as_i64(&self) -> Result<i64, String> {
        match self {
            Value::I64(v) => Ok(*v),
            other => Err(format!("expected I64 payload, got {}", other.kind_name())),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Value::I64(_) => "I64",
            Value::F64(_) => "F64",
            Value::U64s(_) => "U64s",
            Value::Block(_) => "Block",
            Value::Histogram(_) => "Histogram",
            Value::KMeansUpdate(_) => "KMeansUpdate",
            Value::Svm(_) => "Svm",
            Value::KdTreeFit(_) => "KdTreeFit",
            Value::KnnHits(_) => "KnnHits",
        }
    }
}
