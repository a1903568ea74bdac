//! Dijkstra-style shortest paths over a graph, optionally restricted to an
//! edge filter and a distance bound.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::{EdgeId, Graph, GraphError, VertexId};

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: VertexId,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on distance, ties by vertex id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable scratch space for repeated point-to-point queries on graphs with
/// the same vertex count.
pub struct DistanceWorkspace {
    dist: Vec<f64>,
    stamp: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Entry>,
}

impl DistanceWorkspace {
    pub fn new(n: usize) -> Self {
        DistanceWorkspace {
            dist: alloc::vec![f64::INFINITY; n],
            stamp: alloc::vec![0; n],
            epoch: 0,
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, f64::INFINITY);
            self.stamp.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.heap.clear();
    }

    #[inline]
    fn get(&self, v: VertexId) -> f64 {
        if self.stamp[v] == self.epoch {
            self.dist[v]
        } else {
            f64::INFINITY
        }
    }

    #[inline]
    fn set(&mut self, v: VertexId, d: f64) {
        self.stamp[v] = self.epoch;
        self.dist[v] = d;
    }

    /// Distance from `u` to `v` using only edges accepted by `allow` whose
    /// endpoints are present. Returns the exact distance when it is at most
    /// `bound`, and `+inf` otherwise.
    pub fn distance<F>(&mut self, g: &Graph, u: VertexId, v: VertexId, bound: f64, allow: F) -> f64
    where
        F: Fn(EdgeId) -> bool,
    {
        if u == v {
            return 0.0;
        }
        if !g.is_present(u) || !g.is_present(v) {
            return f64::INFINITY;
        }
        self.reset(g.n());
        self.set(u, 0.0);
        self.heap.push(Entry { dist: 0.0, vertex: u });
        while let Some(Entry { dist, vertex }) = self.heap.pop() {
            if dist > self.get(vertex) {
                continue;
            }
            if vertex == v {
                return dist;
            }
            for &(w, id) in g.out_neighbors(vertex) {
                if !g.is_present(w) || !allow(id) {
                    continue;
                }
                let nd = dist + g.edge(id).length;
                if nd <= bound && nd < self.get(w) {
                    self.set(w, nd);
                    self.heap.push(Entry { dist: nd, vertex: w });
                }
            }
        }
        f64::INFINITY
    }

    /// Single-source distances (unbounded, all edges), `+inf` if unreachable.
    pub fn distances_from(&mut self, g: &Graph, u: VertexId) -> Vec<f64> {
        self.reset(g.n());
        let mut out = alloc::vec![f64::INFINITY; g.n()];
        if !g.is_present(u) {
            return out;
        }
        self.set(u, 0.0);
        self.heap.push(Entry { dist: 0.0, vertex: u });
        while let Some(Entry { dist, vertex }) = self.heap.pop() {
            if dist > self.get(vertex) {
                continue;
            }
            out[vertex] = dist;
            for &(w, id) in g.out_neighbors(vertex) {
                if !g.is_present(w) {
                    continue;
                }
                let nd = dist + g.edge(id).length;
                if nd < self.get(w) {
                    self.set(w, nd);
                    self.heap.push(Entry { dist: nd, vertex: w });
                }
            }
        }
        out
    }
}

/// Length of a shortest `u -> v` path, `+inf` when unreachable.
pub fn shortest_path_dist(g: &Graph, u: VertexId, v: VertexId) -> Result<f64, GraphError> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    Ok(DistanceWorkspace::new(g.n()).distance(g, u, v, f64::INFINITY, |_| true))
}

/// Hop distances from `source` in the undirected version of `g`
/// (`usize::MAX` when unreachable).
pub fn hop_distances(g: &Graph, source: VertexId) -> Vec<usize> {
    let mut out = alloc::vec![usize::MAX; g.n()];
    let mut queue = alloc::collections::VecDeque::new();
    out[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for w in g.undirected_neighbors(u) {
            if out[w] == usize::MAX && g.is_present(w) {
                out[w] = out[u] + 1;
                queue.push_back(w);
            }
        }
    }
    out
}
