//! Lloyd iteration pieces: per-block partial sums, merge, recompute.

/// Per-cluster accumulators from one block: point sums and member counts.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSums {
    /// Flat `k x dims`, row per cluster.
    pub sums: Vec<f64>,
    pub counts: Vec<u64>,
}

impl PartialSums {
    pub fn zeros(k: usize, dims: usize) -> Self {
        Self {
            sums: vec![0.0; k * dims],
            counts: vec![0; k],
        }
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Index of the nearest center by squared distance, ties to the lowest index.
#[inline]
fn nearest_center(point: &[f64], centers: &[f64], dims: usize) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.chunks_exact(dims).enumerate() {
        let d = dist2(point, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// Assign every row of `block` to its nearest center and accumulate.
pub fn kmeans_partial(block: &[f64], centers: &[f64], dims: usize) -> PartialSums {
    let k = centers.len() / dims;
    let mut out = PartialSums::zeros(k, dims);
    for point in block.chunks_exact(dims) {
        let (c, _) = nearest_center(point, centers, dims);
        out.counts[c] += 1;
        let sums = &mut out.sums[c * dims..(c + 1) * dims];
        for (s, v) in sums.iter_mut().zip(point) {
            *s += v;
        }
    }
    out
}

/// Sum of squared distances from each row to its nearest center.
///
/// Evaluated against the centers used for the assignment, so summing it over
/// the blocks of one iteration gives that iteration's inertia.
pub fn assignment_inertia(block: &[f64], centers: &[f64], dims: usize) -> f64 {
    let mut acc = 0.0;
    for point in block.chunks_exact(dims) {
        let (_, d) = nearest_center(point, centers, dims);
        acc += d;
    }
    acc
}

/// Element-wise merge, in the order given.
pub fn kmeans_merge(parts: &[&PartialSums]) -> PartialSums {
    let mut it = parts.iter();
    let first = it.next().expect("kmeans_merge over at least one partial");
    let mut acc = (*first).clone();
    for p in it {
        assert_eq!(p.sums.len(), acc.sums.len(), "partial shape mismatch");
        for (a, b) in acc.sums.iter_mut().zip(p.sums.iter()) {
            *a += b;
        }
        for (a, b) in acc.counts.iter_mut().zip(p.counts.iter()) {
            *a += b;
        }
    }
    acc
}

/// New centers from merged accumulators; an empty cluster keeps its old center.
pub fn kmeans_recompute(merged: &PartialSums, old_centers: &[f64], dims: usize) -> Vec<f64> {
    let k = merged.counts.len();
    let mut centers = vec![0.0; k * dims];
    for c in 0..k {
        if merged.counts[c] == 0 {
            centers[c * dims..(c + 1) * dims]
                .copy_from_slice(&old_centers[c * dims..(c + 1) * dims]);
        } else {
            let n = merged.counts[c] as f64;
            for d in 0..dims {
                centers[c * dims + d] = merged.sums[c * dims + d] / n;
            }
        }
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_sums_everything() {
        let block = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = kmeans_partial(&block, &[0.0, 0.0], 2);
        assert_eq!(p.counts, vec![3]);
        assert_eq!(p.sums, vec![1.0 + 3.0 + 5.0, 2.0 + 4.0 + 6.0]);
    }

    #[test]
    fn equidistant_point_goes_to_lowest_index() {
        let centers = [0.0, 0.0, 1.0, 0.0];
        let p = kmeans_partial(&[0.5, 0.0], &centers, 2);
        assert_eq!(p.counts, vec![1, 0]);
    }

    #[test]
    fn centers_that_are_points_claim_themselves() {
        let block = [0.0, 0.0, 10.0, 10.0];
        let p = kmeans_partial(&block, &block, 2);
        assert_eq!(p.counts, vec![1, 1]);
    }

    #[test]
    fn merge_is_elementwise_and_grouping_insensitive() {
        let a = kmeans_partial(&[1.0, 1.0], &[0.0, 0.0], 2);
        let b = kmeans_partial(&[3.0, 5.0], &[0.0, 0.0], 2);
        let c = kmeans_partial(&[7.0, 9.0], &[0.0, 0.0], 2);
        let flat = kmeans_merge(&[&a, &b, &c]);
        let nested = kmeans_merge(&[&kmeans_merge(&[&a, &b]), &c]);
        assert_eq!(flat, nested);
        assert_eq!(flat.counts, vec![3]);
    }

    #[test]
    fn merge_of_symmetric_parts_doubles() {
        let a = kmeans_partial(&[1.0, 2.0], &[0.0, 0.0], 2);
        let m = kmeans_merge(&[&a, &a]);
        assert_eq!(m.sums, vec![2.0, 4.0]);
        assert_eq!(m.counts, vec![2]);
    }

    #[test]
    fn recompute_is_mean_and_keeps_empty_clusters() {
        let merged = PartialSums {
            sums: vec![4.0, 6.0, 0.0, 0.0],
            counts: vec![2, 0],
        };
        let old = [9.0, 9.0, 7.0, 8.0];
        let centers = kmeans_recompute(&merged, &old, 2);
        assert_eq!(centers, vec![2.0, 3.0, 7.0, 8.0]);
    }

    #[test]
    fn unit_square_one_iteration_lands_on_edge_midpoints() {
        // Four corners, centers seeded at the two bottom corners. One Lloyd
        // step moves them to the midpoints of the vertical edges.
        let block = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let init = [0.0, 0.0, 1.0, 0.0];
        let p = kmeans_partial(&block, &init, 2);
        let centers = kmeans_recompute(&kmeans_merge(&[&p]), &init, 2);
        assert_eq!(centers, vec![0.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn inertia_matches_hand_sum() {
        let block = [0.0, 0.0, 2.0, 0.0];
        let centers = [1.0, 0.0];
        assert_eq!(assignment_inertia(&block, &centers, 2), 2.0);
    }
}
