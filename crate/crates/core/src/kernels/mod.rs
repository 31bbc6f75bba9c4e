//! Pure numerical kernels shared by the applications.
//!
//! Nothing here touches the runtime: every function maps plain slices to
//! plain values so the same code runs inside a task or inside a test oracle.

pub mod histogram;
pub mod kdtree;
pub mod kmeans;
pub mod svm;

pub use histogram::{histogramdd, sum_counts, Histogram, HistogramSpec};
pub use kdtree::{
    brute_knn, kdtree_build, kdtree_build_with_leaf_size, kdtree_knn, merge_kqueries, KdTree,
    KnnResult,
};
pub use kmeans::{assignment_inertia, kmeans_merge, kmeans_partial, kmeans_recompute, PartialSums};
pub use svm::{smo_train, svm_predict, SmoParams, SvmModel};
