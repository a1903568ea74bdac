//! Weighted graphs with per-edge length and cost, vertex-deletion views and
//! length-two path enumeration.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub type VertexId = usize;

/// Index into a graph's edge sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub length: f64,
    pub cost: f64,
}

impl Edge {
    pub fn new(tail: VertexId, head: VertexId, length: f64, cost: f64) -> Self {
        Edge { tail, head, length, cost }
    }

    /// Unit length, unit cost.
    pub fn unit(tail: VertexId, head: VertexId) -> Self {
        Edge::new(tail, head, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    InvalidVertex { vertex: VertexId, n: usize },
    #[error("edge {index} is a self-loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: VertexId },
    #[error("edge {index} duplicates ({tail}, {head})")]
    DuplicateEdge { index: usize, tail: VertexId, head: VertexId },
    #[error("edge {index} has a negative or non-finite {field}")]
    BadWeight { index: usize, field: &'static str },
    #[error("edge id {0} out of range")]
    InvalidEdge(usize),
}

/// A path `tail -> mid -> head` of exactly two edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path2 {
    pub tail: VertexId,
    pub mid: VertexId,
    pub head: VertexId,
}

/// A length-two path together with the ids of its two edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Path2Edges {
    pub path: Path2,
    pub first: EdgeId,
    pub second: EdgeId,
}

/// A set of failed vertices, kept sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaultSet(Vec<VertexId>);

impl FaultSet {
    pub fn empty() -> Self {
        FaultSet(Vec::new())
    }

    pub fn new<I: IntoIterator<Item = VertexId>>(vertices: I) -> Self {
        let mut v: Vec<VertexId> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FaultSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn validate(&self, n: usize) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&v) if v >= n => Err(GraphError::InvalidVertex { vertex: v, n }),
            _ => Ok(()),
        }
    }

    pub fn is_subset(&self, other: &FaultSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }
}

/// Directed or undirected graph on vertices `0..n`.
///
/// Undirected edges are stored once with `tail < head`; the adjacency lists
/// of an undirected graph list every edge from both endpoints. Vertices that
/// were removed by [`Graph::remove_vertices`] keep their ids and are marked
/// absent.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<Edge>,
    absent: Vec<bool>,
    out_adj: Vec<Vec<(VertexId, EdgeId)>>,
    in_adj: Vec<Vec<(VertexId, EdgeId)>>,
    index: BTreeMap<(VertexId, VertexId), EdgeId>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.directed == other.directed
            && self.edges == other.edges
            && self.absent == other.absent
    }
}

impl Graph {
    pub fn new<I>(n: usize, directed: bool, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut out: Vec<Edge> = Vec::new();
        let mut index = BTreeMap::new();
        for (i, mut e) in edges.into_iter().enumerate() {
            for v in [e.tail, e.head] {
                if v >= n {
                    return Err(GraphError::InvalidVertex { vertex: v, n });
                }
            }
            if e.tail == e.head {
                return Err(GraphError::SelfLoop { index: i, vertex: e.tail });
            }
            if !(e.length.is_finite() && e.length >= 0.0) {
                return Err(GraphError::BadWeight { index: i, field: "length" });
            }
            if !(e.cost.is_finite() && e.cost >= 0.0) {
                return Err(GraphError::BadWeight { index: i, field: "cost" });
            }
            if !directed && e.tail > e.head {
                core::mem::swap(&mut e.tail, &mut e.head);
            }
            if index.insert((e.tail, e.head), EdgeId(out.len())).is_some() {
                return Err(GraphError::DuplicateEdge { index: i, tail: e.tail, head: e.head });
            }
            out.push(e);
        }
        Ok(Self::assemble(n, directed, out, alloc::vec![false; n], index))
    }

    /// Unit lengths and costs.
    pub fn unit(n: usize, directed: bool, pairs: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        Graph::new(n, directed, pairs.iter().map(|&(u, v)| Edge::unit(u, v)))
    }

    fn assemble(
        n: usize,
        directed: bool,
        edges: Vec<Edge>,
        absent: Vec<bool>,
        index: BTreeMap<(VertexId, VertexId), EdgeId>,
    ) -> Self {
        let mut out_adj = alloc::vec![Vec::new(); n];
        let mut in_adj = alloc::vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            let id = EdgeId(i);
            out_adj[e.tail].push((e.head, id));
            in_adj[e.head].push((e.tail, id));
            if !directed {
                out_adj[e.head].push((e.tail, id));
                in_adj[e.tail].push((e.head, id));
            }
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        Graph { n, directed, edges, absent, out_adj, in_adj, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn is_present(&self, v: VertexId) -> bool {
        !self.absent[v]
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex { vertex: v, n: self.n })
        }
    }

    /// The edge from `u` to `v` (either orientation when undirected).
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        self.index.get(&key).copied()
    }

    /// Out-arcs of `u` as `(neighbor, edge)`, sorted by neighbor id.
    pub fn out_neighbors(&self, u: VertexId) -> &[(VertexId, EdgeId)] {
        &self.out_adj[u]
    }

    /// In-arcs of `u` as `(neighbor, edge)`, sorted by neighbor id.
    pub fn in_neighbors(&self, u: VertexId) -> &[(VertexId, EdgeId)] {
        &self.in_adj[u]
    }

    /// Neighbors ignoring direction, sorted and deduplicated.
    pub fn undirected_neighbors(&self, u: VertexId) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.out_adj[u]
            .iter()
            .chain(self.in_adj[u].iter())
            .map(|&(w, _)| w)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Maximum over vertices of the larger of in- and out-degree.
    pub fn max_degree(&self) -> usize {
        (0..self.n)
            .map(|u| self.out_adj[u].len().max(self.in_adj[u].len()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_unit_length(&self) -> bool {
        self.edges.iter().all(|e| e.length == 1.0)
    }

    pub fn is_unit_cost(&self) -> bool {
        self.edges.iter().all(|e| e.cost == 1.0)
    }

    pub fn total_cost<I: IntoIterator<Item = EdgeId>>(&self, ids: I) -> f64 {
        ids.into_iter().map(|e| self.edges[e.0].cost).sum()
    }

    /// Same graph with the costs replaced edge by edge.
    pub fn with_costs(&self, costs: &[f64]) -> Result<Graph, GraphError> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(costs)
            .map(|(e, &c)| Edge { cost: c, ..*e })
            .collect();
        if edges.len() != self.edges.len() {
            return Err(GraphError::InvalidEdge(costs.len()));
        }
        let mut g = Graph::new(self.n, self.directed, edges)?;
        g.absent.clone_from(&self.absent);
        Ok(g)
    }

    /// Explicit expansion of an undirected graph into a directed graph with
    /// both arcs per edge. Arc `2i` is `tail -> head` of edge `i`, arc `2i+1`
    /// the reverse. Directed graphs are returned unchanged.
    pub fn to_directed(&self) -> Graph {
        if self.directed {
            return self.clone();
        }
        let arcs = self.edges.iter().flat_map(|e| {
            [Edge { ..*e }, Edge { tail: e.head, head: e.tail, ..*e }]
        });
        let mut g = Graph::new(self.n, true, arcs).expect("expansion of a valid graph");
        g.absent.clone_from(&self.absent);
        g
    }

    /// The graph `G \ F` on the same id space: every edge touching `F` is
    /// deleted and the vertices of `F` are marked absent. Edge ids are
    /// renumbered; use [`Graph::edge_between`] on the host to map back.
    pub fn remove_vertices(&self, f: &FaultSet) -> Result<Graph, GraphError> {
        f.validate(self.n)?;
        let mut absent = self.absent.clone();
        for &v in f.vertices() {
            absent[v] = true;
        }
        let mut edges = Vec::new();
        let mut index = BTreeMap::new();
        for e in &self.edges {
            if !absent[e.tail] && !absent[e.head] {
                index.insert((e.tail, e.head), EdgeId(edges.len()));
                edges.push(*e);
            }
        }
        Ok(Self::assemble(self.n, self.directed, edges, absent, index))
    }

    /// Subgraph keeping only the listed edges (same vertex set).
    pub fn edge_subgraph<I: IntoIterator<Item = EdgeId>>(&self, ids: I) -> Graph {
        let mut edges = Vec::new();
        let mut index = BTreeMap::new();
        let mut ids: Vec<EdgeId> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            let e = self.edges[id.0];
            index.insert((e.tail, e.head), EdgeId(edges.len()));
            edges.push(e);
        }
        Self::assemble(self.n, self.directed, edges, self.absent.clone(), index)
    }

    /// All paths `u -> z -> v` with both edges present, ordered by `z`.
    pub fn length2_paths(&self, u: VertexId, v: VertexId) -> Vec<Path2> {
        self.length2_paths_with_edges(u, v).into_iter().map(|p| p.path).collect()
    }

    pub fn length2_paths_with_edges(&self, u: VertexId, v: VertexId) -> Vec<Path2Edges> {
        if u >= self.n || v >= self.n || u == v {
            return Vec::new();
        }
        self.out_adj[u]
            .iter()
            .filter(|&&(z, _)| z != v)
            .filter_map(|&(z, first)| {
                self.edge_between(z, v).map(|second| Path2Edges {
                    path: Path2 { tail: u, mid: z, head: v },
                    first,
                    second,
                })
            })
            .collect()
    }
}
