//! Spanners as edge subsets of a host graph, the greedy base construction and
//! stretch verification.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dist::DistanceWorkspace;
use crate::graph::{EdgeId, Graph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpannerError {
    #[error("{0} requires an undirected graph")]
    DirectedInput(&'static str),
    #[error("stretch must be at least 1, got {0}")]
    InvalidStretch(u32),
    #[error("edge id {id} out of range for host with {edges} edges")]
    EdgeOutOfRange { id: usize, edges: usize },
    #[error("{0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannerMeta {
    pub algorithm: String,
    pub k: u32,
    pub r: usize,
    pub seed: u64,
}

impl SpannerMeta {
    pub fn new(algorithm: &str, k: u32, r: usize, seed: u64) -> Self {
        SpannerMeta { algorithm: algorithm.into(), k, r, seed }
    }
}

/// An edge subset of a host graph. The host is not stored; every function
/// taking a `(Graph, Spanner)` pair expects the spanner's ids to index that
/// graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanner {
    edges: BTreeSet<EdgeId>,
    pub meta: SpannerMeta,
}

impl Spanner {
    pub fn new<I: IntoIterator<Item = EdgeId>>(edges: I, meta: SpannerMeta) -> Self {
        Spanner { edges: edges.into_iter().collect(), meta }
    }

    /// The host graph viewed as a spanner of itself.
    pub fn full(g: &Graph, meta: SpannerMeta) -> Self {
        Spanner::new(g.edge_ids(), meta)
    }

    pub fn edges(&self) -> &BTreeSet<EdgeId> {
        &self.edges
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn insert(&mut self, e: EdgeId) -> bool {
        self.edges.insert(e)
    }

    pub fn remove(&mut self, e: EdgeId) -> bool {
        self.edges.remove(&e)
    }

    pub fn extend<I: IntoIterator<Item = EdgeId>>(&mut self, it: I) {
        self.edges.extend(it)
    }

    pub fn is_subset(&self, other: &Spanner) -> bool {
        self.edges.is_subset(&other.edges)
    }

    /// Membership vector indexed by host edge id.
    pub fn mask(&self, host_edges: usize) -> Vec<bool> {
        let mut m = alloc::vec![false; host_edges];
        for e in &self.edges {
            m[e.0] = true;
        }
        m
    }

    pub fn cost(&self, g: &Graph) -> f64 {
        g.total_cost(self.edges.iter().copied())
    }

    pub fn check_host(&self, g: &Graph) -> Result<(), SpannerError> {
        match self.edges.iter().next_back() {
            Some(e) if e.0 >= g.num_edges() => {
                Err(SpannerError::EdgeOutOfRange { id: e.0, edges: g.num_edges() })
            }
            _ => Ok(()),
        }
    }
}

/// A (non fault-tolerant) k-spanner construction that can be plugged into
/// the fault-tolerant conversion.
pub trait BaseSpannerAlgorithm {
    fn name(&self) -> &'static str;
    fn build(&self, g: &Graph, k: u32) -> Result<Spanner, SpannerError>;
}

/// The classic greedy construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl BaseSpannerAlgorithm for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn build(&self, g: &Graph, k: u32) -> Result<Spanner, SpannerError> {
        greedy_spanner(g, k)
    }
}

/// Scan edges by nondecreasing length (ties by id) and keep an edge iff the
/// spanner built so far has no path within `k` times its length.
pub fn greedy_spanner(g: &Graph, k: u32) -> Result<Spanner, SpannerError> {
    if g.directed() {
        return Err(SpannerError::DirectedInput("greedy spanner"));
    }
    if k == 0 {
        return Err(SpannerError::InvalidStretch(k));
    }
    let mut order: Vec<EdgeId> = g.edge_ids().collect();
    order.sort_by(|a, b| g.edge(*a).length.total_cmp(&g.edge(*b).length).then(a.cmp(b)));
    let mut kept = alloc::vec![false; g.num_edges()];
    let mut ws = DistanceWorkspace::new(g.n());
    let kf = k as f64;
    for id in order {
        let e = g.edge(id);
        let bound = kf * e.length;
        if ws.distance(g, e.tail, e.head, bound, |x| kept[x.0]) > bound {
            kept[id.0] = true;
        }
    }
    let edges = g.edge_ids().filter(|e| kept[e.0]);
    Ok(Spanner::new(edges, SpannerMeta::new("greedy", k, 0, 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StretchReport {
    pub ok: bool,
    /// Lowest-id host edge whose stretch exceeds `k`.
    pub witness: Option<EdgeId>,
}

/// Checks `d_h(u, v) <= k * len(u, v)` for every host edge.
pub fn verify_stretch(g: &Graph, h: &Spanner, k: f64) -> StretchReport {
    let mask = h.mask(g.num_edges());
    let mut ws = DistanceWorkspace::new(g.n());
    for id in g.edge_ids() {
        if mask[id.0] {
            continue;
        }
        let e = g.edge(id);
        let bound = k * e.length;
        if ws.distance(g, e.tail, e.head, bound, |x| mask[x.0]) > bound {
            return StretchReport { ok: false, witness: Some(id) };
        }
    }
    StretchReport { ok: true, witness: None }
}

/// Largest `d_h(u, v) / len(u, v)` over host edges; `+inf` if some edge is
/// disconnected in `h`, and 1 for an edgeless host.
pub fn max_stretch(g: &Graph, h: &Spanner) -> f64 {
    let mask = h.mask(g.num_edges());
    let mut ws = DistanceWorkspace::new(g.n());
    let mut worst: f64 = 1.0;
    for id in g.edge_ids() {
        if mask[id.0] {
            continue;
        }
        let e = g.edge(id);
        let d = ws.distance(g, e.tail, e.head, f64::INFINITY, |x| mask[x.0]);
        let s = if e.length > 0.0 {
            d / e.length
        } else if d == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(s);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    fn meta() -> SpannerMeta {
        SpannerMeta::new("test", 1, 0, 0)
    }

    #[test]
    fn trees_are_kept_whole() {
        for seed in 0..5 {
            let t = generators::random_tree(12, seed);
            for k in [1, 3, 5] {
                assert_eq!(greedy_spanner(&t, k).unwrap().len(), 11);
            }
        }
    }

    #[test]
    fn four_cycle_k3_matches_brute_force() {
        let g = generators::cycle(4);
        let h = greedy_spanner(&g, 3).unwrap();
        assert_eq!(h.len(), 3);
        assert!(!h.contains(EdgeId(3)));
        // smallest valid subset by exhaustive enumeration
        let best = (0u32..16)
            .filter(|m| {
                let s = Spanner::new((0..4).filter(|i| m >> i & 1 == 1).map(EdgeId), meta());
                verify_stretch(&g, &s, 3.0).ok
            })
            .map(|m| m.count_ones())
            .min()
            .unwrap();
        assert_eq!(best, 3);
    }

    #[test]
    fn verify_examples() {
        let g = generators::cycle(4);
        assert!(verify_stretch(&g, &Spanner::full(&g, meta()), 1.0).ok);
        let h = greedy_spanner(&g, 3).unwrap();
        assert!(verify_stretch(&g, &h, 3.0).ok);
        let r = verify_stretch(&g, &h, 2.0);
        assert!(!r.ok);
        assert_eq!(r.witness, Some(EdgeId(3)));
        let empty = Spanner::new([], meta());
        assert!(!verify_stretch(&g, &empty, 10.0).ok);
        assert_eq!(max_stretch(&g, &h), 3.0);
    }

    #[test]
    fn complete_graph_size() {
        for n in [8usize, 16, 32, 64] {
            let h = greedy_spanner(&generators::complete(n, false), 3).unwrap();
            assert!((h.len() as f64) <= (n as f64).powf(1.5) + n as f64);
        }
    }

    #[test]
    fn directed_input_rejected() {
        let g = generators::complete(3, true);
        assert!(matches!(greedy_spanner(&g, 3), Err(SpannerError::DirectedInput(_))));
    }

    /// No cycle of length <= k+1 in a unit-length greedy spanner: for every
    /// kept edge, the rest of the spanner has no path of length <= k.
    fn girth_exceeds(g: &Graph, h: &Spanner, k: u32) -> bool {
        let mut ws = DistanceWorkspace::new(g.n());
        h.edges().iter().all(|&e| {
            let ed = g.edge(e);
            ws.distance(g, ed.tail, ed.head, k as f64, |x| x != e && h.contains(x)) > k as f64
        })
    }

    proptest! {
        #[test]
        fn greedy_is_sound_and_has_large_girth(n in 3usize..20, prob in 0.1f64..0.9, seed in any::<u64>(),
                                               k in prop_oneof![Just(1u32), Just(3), Just(5)]) {
            let g = generators::gnp(n, prob, false, seed);
            let h = greedy_spanner(&g, k).unwrap();
            prop_assert!(verify_stretch(&g, &h, k as f64).ok);
            prop_assert!(girth_exceeds(&g, &h, k));
            prop_assert_eq!(greedy_spanner(&g, k).unwrap(), h);
        }
    }
}
