use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{EngineError, GrowthProcess, Step};
use crate::lattice::{Cluster, Vertex};
use crate::rng::RngStream;

#[derive(Copy, Clone, Debug)]
struct Entry {
    time: f64,
    seq: u64,
    vertex: Vertex,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Edge key with the lexicographically smaller endpoint first.
fn edge_key(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Shortest-path growth over Exp(1) edge weights, drawn on first touch and
/// cached per run. Settled vertices form the cluster; stale heap entries are
/// skipped on pop.
#[derive(Clone, Debug)]
pub struct Dijkstra {
    cluster: Cluster,
    heap: BinaryHeap<Entry>,
    weights: HashMap<(Vertex, Vertex), f64>,
    seq: u64,
    time: f64,
}

impl Dijkstra {
    /// Starts from the single member of `cluster` and relaxes its edges.
    pub fn new(cluster: Cluster, rng: &mut RngStream) -> Self {
        let mut d = Dijkstra {
            cluster,
            heap: BinaryHeap::new(),
            weights: HashMap::new(),
            seq: 0,
            time: 0.0,
        };
        for m in d.cluster.members() {
            d.relax(m, 0.0, rng);
        }
        d
    }

    /// Weight of the edge `{a, b}` if it has been drawn.
    pub fn edge_weight(&self, a: Vertex, b: Vertex) -> Option<f64> {
        self.weights.get(&edge_key(a, b)).copied()
    }

    fn weight(&mut self, a: Vertex, b: Vertex, rng: &mut RngStream) -> f64 {
        *self
            .weights
            .entry(edge_key(a, b))
            .or_insert_with(|| rng.exp1())
    }

    fn relax(&mut self, v: Vertex, t: f64, rng: &mut RngStream) {
        for u in v.neighbors() {
            if self.cluster.contains(u) || !self.cluster.admits(u) {
                continue;
            }
            let w = self.weight(v, u, rng);
            self.seq += 1;
            self.heap.push(Entry {
                time: t + w,
                seq: self.seq,
                vertex: u,
            });
        }
    }
}

impl GrowthProcess for Dijkstra {
    fn cluster(&self) -> &Cluster {
        &self.cluster
    }

    fn elapsed(&self) -> f64 {
        self.time
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<Step, EngineError> {
        loop {
            let Some(e) = self.heap.pop() else {
                return Err(EngineError::EmptyBoundary);
            };
            if self.cluster.contains(e.vertex) {
                continue;
            }
            let y = self.cluster.boundary_count();
            self.cluster.add_vertex(e.vertex)?;
            let increment = e.time - self.time;
            self.time = e.time;
            self.relax(e.vertex, e.time, rng);
            return Ok(Step {
                vertex: e.vertex,
                y_count: y as u32,
                increment,
            });
        }
    }
}
