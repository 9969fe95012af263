//! Given-data estimation of total indices by nearest-neighbour conditioning.
//!
//! For a coalition `A`, the conditioning coordinates are those of `Ā`, each
//! standardized by its sample standard deviation. Every observation is its
//! own first neighbour; the other `k − 1` are the nearest remaining rows in
//! Euclidean distance, ties going to the lower row index. The unbiased
//! variance of `Y` over these `k` rows estimates `Var(Y | X_Ā)` at that point.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{estimate_variance, welford, DataSet, EstimatorKind, IndexEstimate};
use crate::coalition::Coalition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborSearch {
    BruteForce,
    KdTree,
}

pub(crate) fn check_k(data: &DataSet, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::contract(format!(
            "neighbour count must be >= 2, got {k}"
        )));
    }
    if data.len() <= k {
        return Err(Error::contract(format!(
            "{} observations are too few for {k} neighbours",
            data.len()
        )));
    }
    Ok(())
}

/// kNN estimate of `S^T_A` with kd-tree search.
pub fn estimate_total_sobol_knn(data: &DataSet, a: Coalition, k: usize) -> Result<IndexEstimate> {
    estimate_total_sobol_knn_with(data, a, k, NeighborSearch::KdTree)
}

pub fn estimate_total_sobol_knn_with(
    data: &DataSet,
    a: Coalition,
    k: usize,
    search: NeighborSearch,
) -> Result<IndexEstimate> {
    if a.players() != data.dim() {
        return Err(Error::contract("coalition and data dimensions differ"));
    }
    check_k(data, k)?;
    let variance = estimate_variance(data.y())?;
    let value = if variance <= 0.0 {
        0.0
    } else {
        Prepared::new(data).total_index(a, k, variance, search)
    };
    Ok(IndexEstimate::point(a, value, EstimatorKind::Knn))
}

/// Standardized inputs, stored row-major.
pub(crate) struct Prepared<'a> {
    data: &'a DataSet,
    z: Vec<f64>,
    d: usize,
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(data: &'a DataSet) -> Self {
        let (n, d) = (data.len(), data.dim());
        let x = data.x();
        let scales: Vec<f64> = (0..d)
            .map(|j| {
                let sd = welford(x.column(j).iter().copied()).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let mut z = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                z.push(x[(i, j)] / scales[j]);
            }
        }
        Self { data, z, d }
    }

    pub(crate) fn total_index(
        &self,
        a: Coalition,
        k: usize,
        variance: f64,
        search: NeighborSearch,
    ) -> f64 {
        if a.is_empty() {
            return 0.0;
        }
        if a.is_full() {
            return 1.0;
        }
        let given: Vec<usize> = a.complement().members().collect();
        let m = given.len();
        let n = self.data.len();
        let mut points = Vec::with_capacity(n * m);
        for i in 0..n {
            let row = &self.z[i * self.d..(i + 1) * self.d];
            points.extend(given.iter().map(|&j| row[j]));
        }
        let y = self.data.y();
        let tree = match search {
            NeighborSearch::KdTree => Some(KdTree::build(&points, m)),
            NeighborSearch::BruteForce => None,
        };
        let mut heap = BinaryHeap::with_capacity(k);
        let mut found = Vec::with_capacity(k);
        let mut sum = 0.0;
        for i in 0..n {
            match &tree {
                Some(t) => t.nearest(&points, i, k - 1, &mut heap),
                None => brute_force(&points, m, i, k - 1, &mut heap),
            }
            // Heap layout depends on insertion order; sort so the sum does not.
            found.clear();
            found.extend(heap.drain());
            found.sort_unstable();
            let neighbours = found.iter().map(|c| y[c.index]);
            sum += welford(std::iter::once(y[i]).chain(neighbours));
        }
        sum / n as f64 / variance
    }
}

/// Neighbour candidate ordered by `(distance², index)`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

fn dist2(points: &[f64], m: usize, a: usize, b: usize) -> f64 {
    let pa = &points[a * m..(a + 1) * m];
    let pb = &points[b * m..(b + 1) * m];
    pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Keeps the `want` smallest candidates in a max-heap.
fn offer(heap: &mut BinaryHeap<Candidate>, want: usize, c: Candidate) {
    if heap.len() < want {
        heap.push(c);
    } else if c < *heap.peek().expect("want >= 1") {
        heap.pop();
        heap.push(c);
    }
}

fn brute_force(
    points: &[f64],
    m: usize,
    query: usize,
    want: usize,
    heap: &mut BinaryHeap<Candidate>,
) {
    let n = points.len() / m;
    for j in (0..n).filter(|&j| j != query) {
        offer(
            heap,
            want,
            Candidate {
                dist2: dist2(points, m, query, j),
                index: j,
            },
        );
    }
}

const LEAF_SIZE: usize = 8;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// kd-tree over row indices. A subtree is skipped only when its splitting
/// plane is strictly farther than the current worst neighbour, so results
/// match the exhaustive search exactly, ties included.
struct KdTree {
    m: usize,
    order: Vec<usize>,
    root: Node,
}

impl KdTree {
    fn build(points: &[f64], m: usize) -> Self {
        let n = points.len() / m;
        let mut order: Vec<usize> = (0..n).collect();
        let root = Self::build_node(points, m, &mut order, 0);
        Self { m, order, root }
    }

    fn build_node(points: &[f64], m: usize, idx: &mut [usize], start: usize) -> Node {
        let end = start + idx.len();
        if idx.len() <= LEAF_SIZE {
            return Node::Leaf { start, end };
        }
        let axis = (0..m)
            .max_by(|&a, &b| spread(points, m, idx, a).total_cmp(&spread(points, m, idx, b)))
            .expect("m >= 1");
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&p, &q| {
            points[p * m + axis].total_cmp(&points[q * m + axis])
        });
        let value = points[idx[mid] * m + axis];
        let (lo, hi) = idx.split_at_mut(mid);
        Node::Split {
            axis,
            value,
            left: Box::new(Self::build_node(points, m, lo, start)),
            right: Box::new(Self::build_node(points, m, hi, start + mid)),
        }
    }

    fn nearest(&self, points: &[f64], query: usize, want: usize, heap: &mut BinaryHeap<Candidate>) {
        self.visit(&self.root, points, query, want, heap);
    }

    fn visit(
        &self,
        node: &Node,
        points: &[f64],
        query: usize,
        want: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match node {
            Node::Leaf { start, end } => {
                for &j in &self.order[*start..*end] {
                    if j != query {
                        offer(
                            heap,
                            want,
                            Candidate {
                                dist2: dist2(points, self.m, query, j),
                                index: j,
                            },
                        );
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = points[query * self.m + axis] - value;
                let (near, far) = if delta < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.visit(near, points, query, want, heap);
                let worst = if heap.len() < want {
                    f64::INFINITY
                } else {
                    heap.peek().expect("full").dist2
                };
                if delta * delta <= worst {
                    self.visit(far, points, query, want, heap);
                }
            }
        }
    }
}

fn spread(points: &[f64], m: usize, idx: &[usize], axis: usize) -> f64 {
    let (lo, hi) = idx
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            let v = points[p * m + axis];
            (lo.min(v), hi.max(v))
        });
    hi - lo
}
