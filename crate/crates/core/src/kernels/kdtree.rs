//! Exact k-nearest-neighbor search over a median-split KD-tree.
//!
//! Construction is deterministic: the split dimension cycles with depth, the
//! split point is the lower median under `(coordinate, original index)`
//! ordering, and a node whose points all share the split coordinate becomes a
//! leaf. Every search reports how many point distances it evaluated, which is
//! the cost metric the lookup experiments compare.

pub const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Clone, Debug)]
enum Node {
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Range into `KdTree::leaf_order`.
        start: usize,
        end: usize,
    },
}

/// Immutable search structure over a copied point set.
#[derive(Clone, Debug)]
pub struct KdTree {
    pub dims: usize,
    pub leaf_size: usize,
    /// Row-major copy of the build input.
    points: Vec<f64>,
    n_points: usize,
    nodes: Vec<Node>,
    leaf_order: Vec<usize>,
}

impl KdTree {
    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index * self.dims..(index + 1) * self.dims]
    }

    /// Bytes of the backing storage, for transfer accounting.
    pub fn size_bytes(&self) -> u64 {
        (self.points.len() * 8 + self.nodes.len() * 32 + self.leaf_order.len() * 8) as u64
    }
}

pub fn kdtree_build(points: &[f64], dims: usize) -> KdTree {
    kdtree_build_with_leaf_size(points, dims, DEFAULT_LEAF_SIZE)
}

pub fn kdtree_build_with_leaf_size(points: &[f64], dims: usize, leaf_size: usize) -> KdTree {
    assert!(dims >= 1 && leaf_size >= 1);
    assert_eq!(points.len() % dims, 0);
    let n = points.len() / dims;
    let mut tree = KdTree {
        dims,
        leaf_size,
        points: points.to_vec(),
        n_points: n,
        nodes: Vec::new(),
        leaf_order: Vec::new(),
    };
    if n > 0 {
        let mut ids: Vec<usize> = (0..n).collect();
        build_rec(&mut tree, &mut ids, 0);
    }
    tree
}

fn build_rec(tree: &mut KdTree, ids: &mut [usize], depth: usize) -> usize {
    let dims = tree.dims;
    let dim = depth % dims;
    let coord = |tree: &KdTree, id: usize| tree.points[id * dims + dim];

    let mut make_leaf = ids.len() <= tree.leaf_size;
    if !make_leaf {
        ids.sort_unstable_by(|&a, &b| {
            coord(tree, a)
                .total_cmp(&coord(tree, b))
                .then(a.cmp(&b))
        });
        // All points equal on the split dimension: splitting cannot make
        // progress, so the node degenerates to a leaf.
        make_leaf = coord(tree, ids[0]) == coord(tree, ids[ids.len() - 1]);
    }

    if make_leaf {
        let start = tree.leaf_order.len();
        tree.leaf_order.extend_from_slice(ids);
        let end = tree.leaf_order.len();
        tree.nodes.push(Node::Leaf { start, end });
        return tree.nodes.len() - 1;
    }

    // Lower median; the median point itself stays on the left.
    let mid = (ids.len() - 1) / 2;
    let value = coord(tree, ids[mid]);
    let slot = tree.nodes.len();
    tree.nodes.push(Node::Leaf { start: 0, end: 0 }); // placeholder
    let (left_ids, right_ids) = ids.split_at_mut(mid + 1);
    let left = build_rec(tree, left_ids, depth + 1);
    let right = build_rec(tree, right_ids, depth + 1);
    tree.nodes[slot] = Node::Split {
        dim,
        value,
        left,
        right,
    };
    slot
}

/// Neighbors ascending by `(squared distance, index)` plus the number of
/// point-distance evaluations the search performed.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnResult {
    pub hits: Vec<(f64, usize)>,
    pub evals: u64,
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

struct TopK {
    k: usize,
    // Ascending by (dist2, index); last entry is the current worst.
    hits: Vec<(f64, usize)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            hits: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn worst(&self) -> Option<f64> {
        if self.hits.len() < self.k {
            None
        } else {
            Some(self.hits[self.k - 1].0)
        }
    }

    #[inline]
    fn offer(&mut self, d: f64, idx: usize) {
        if self.hits.len() == self.k {
            let last = self.hits[self.k - 1];
            if (d, idx) >= last {
                return;
            }
        }
        let pos = self
            .hits
            .partition_point(|&(hd, hi)| (hd, hi) < (d, idx));
        self.hits.insert(pos, (d, idx));
        self.hits.truncate(self.k);
    }
}

/// Exact k nearest neighbors of `query`; fewer when the tree is smaller than `k`.
pub fn kdtree_knn(tree: &KdTree, query: &[f64], k: usize) -> KnnResult {
    assert!(k >= 1, "k must be at least 1");
    assert_eq!(query.len(), tree.dims);
    let mut top = TopK::new(k);
    let mut evals = 0u64;
    if !tree.is_empty() {
        search_rec(tree, 0, query, &mut top, &mut evals);
    }
    KnnResult {
        hits: top.hits,
        evals,
    }
}

fn search_rec(tree: &KdTree, node: usize, query: &[f64], top: &mut TopK, evals: &mut u64) {
    match tree.nodes[node] {
        Node::Leaf { start, end } => {
            for &id in &tree.leaf_order[start..end] {
                let d = dist2(query, tree.point(id));
                *evals += 1;
                top.offer(d, id);
            }
        }
        Node::Split {
            dim,
            value,
            left,
            right,
        } => {
            let delta = query[dim] - value;
            let (near, far) = if delta <= 0.0 {
                (left, right)
            } else {
                (right, left)
            };
            search_rec(tree, near, query, top, evals);
            // The far side may still hold an equal-distance, lower-index
            // point, so only a strictly larger plane distance prunes it.
            let visit_far = match top.worst() {
                None => true,
                Some(w) => delta * delta <= w,
            };
            if visit_far {
                search_rec(tree, far, query, top, evals);
            }
        }
    }
}

/// Exhaustive reference search with the same contract as [`kdtree_knn`].
pub fn brute_knn(points: &[f64], dims: usize, query: &[f64], k: usize) -> KnnResult {
    assert!(k >= 1);
    let n = points.len() / dims;
    let mut all: Vec<(f64, usize)> = (0..n)
        .map(|i| (dist2(query, &points[i * dims..(i + 1) * dims]), i))
        .collect();
    all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    KnnResult {
        hits: all,
        evals: n as u64,
    }
}

/// Globally smallest `k` of several partial hit lists, by
/// `(squared distance, global index)` order.
pub fn merge_kqueries(parts: &[&[(f64, u64)]], k: usize) -> Vec<(f64, u64)> {
    let mut all: Vec<(f64, u64)> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all
}
