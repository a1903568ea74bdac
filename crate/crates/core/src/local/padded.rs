//! Distributed padded decompositions.
//!
//! Every vertex draws a geometric radius truncated at `r_cap` and floods its
//! id that far. A vertex joins the cluster of the smallest id it hears (its
//! own id always counts, at distance 0), so a cluster's center may lie
//! outside the cluster. Forwarding drops an id whenever a smaller id has
//! already reached the same vertex with at least as much remaining range; such
//! an id can never be the smallest one heard further along.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::sim::{broadcast, decode, encode, Message, NodeContext, NodeProgram, Outbox, Session, SimError, SimTrace};
use crate::dist::hop_distances;
use crate::graph::{Graph, VertexId};
use crate::rng::StreamRng;

pub const DEFAULT_P_GEOM: f64 = 0.1;

/// `ceil(4 ln n)`, at least 1.
pub fn default_r_cap(n: usize) -> usize {
    (libm::ceil(4.0 * libm::log(n.max(2) as f64)) as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionConfig {
    pub p_geom: f64,
    pub r_cap: usize,
}

impl DecompositionConfig {
    pub fn for_n(n: usize) -> Self {
        DecompositionConfig { p_geom: DEFAULT_P_GEOM, r_cap: default_r_cap(n) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub center: VertexId,
    /// Sorted.
    pub members: Vec<VertexId>,
}

/// Clusters sorted by center id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub cluster_of: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

impl Partition {
    /// Groups vertices by their chosen center.
    pub fn from_centers(centers: &[VertexId]) -> Self {
        let mut by_center: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for (v, &c) in centers.iter().enumerate() {
            by_center.entry(c).or_default().push(v);
        }
        let clusters: Vec<Cluster> = by_center.into_iter().map(|(center, members)| Cluster { center, members }).collect();
        let mut cluster_of = alloc::vec![0; centers.len()];
        for (i, c) in clusters.iter().enumerate() {
            for &v in &c.members {
                cluster_of[v] = i;
            }
        }
        Partition { cluster_of, clusters }
    }

    pub fn single(n: usize) -> Self {
        Partition::from_centers(&alloc::vec![0; n])
    }

    pub fn cluster(&self, v: VertexId) -> &Cluster {
        &self.clusters[self.cluster_of[v]]
    }

    pub fn center_of(&self, v: VertexId) -> VertexId {
        self.cluster(v).center
    }

    pub fn same_cluster(&self, u: VertexId, v: VertexId) -> bool {
        self.cluster_of[u] == self.cluster_of[v]
    }

    /// Whether `v` and all its neighbours (either direction) share a cluster.
    pub fn is_padded(&self, g: &Graph, v: VertexId) -> bool {
        g.undirected_neighbors(v).into_iter().all(|w| self.same_cluster(v, w))
    }

    /// `cluster_of` and `clusters` agree and cover every vertex once.
    pub fn is_consistent(&self) -> bool {
        let mut seen = alloc::vec![false; self.cluster_of.len()];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in &c.members {
                if v >= seen.len() || seen[v] || self.cluster_of[v] != i {
                    return false;
                }
                seen[v] = true;
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Largest hop distance in `g` between two vertices of the cluster plus
    /// its center.
    pub fn weak_diameter(&self, g: &Graph, cluster: usize) -> usize {
        let c = &self.clusters[cluster];
        let mut pts = c.members.clone();
        pts.push(c.center);
        let mut worst = 0;
        for &a in &pts {
            let d = hop_distances(g, a);
            for &b in &pts {
                worst = worst.max(d[b]);
            }
        }
        worst
    }
}

#[derive(Serialize, Deserialize)]
struct Announce(Vec<(u32, u32)>);

/// One vertex of the decomposition protocol. Runs exactly `r_cap` rounds.
#[derive(Debug, Clone)]
pub struct PaddedNode {
    cfg: DecompositionConfig,
    radius: usize,
    /// origin -> (remaining range on arrival, sender it first came from)
    heard: BTreeMap<VertexId, (usize, Option<VertexId>)>,
    rounds: usize,
}

impl PaddedNode {
    pub fn new(cfg: DecompositionConfig) -> Self {
        PaddedNode { cfg, radius: 0, heard: BTreeMap::new(), rounds: 0 }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Smallest id heard.
    pub fn center(&self) -> VertexId {
        *self.heard.keys().next().expect("a node always hears itself")
    }

    /// Next hop towards `origin`, if this node kept that origin.
    pub fn parent(&self, origin: VertexId) -> Option<VertexId> {
        self.heard.get(&origin).and_then(|&(_, p)| p)
    }

    /// Whether this node kept (and so relays for) `origin`.
    pub fn relays(&self, origin: VertexId) -> bool {
        self.heard.contains_key(&origin)
    }

    /// Remaining range of `origin` on arrival here.
    pub fn range(&self, origin: VertexId) -> Option<usize> {
        self.heard.get(&origin).map(|&(t, _)| t)
    }

    /// Kept origins with their remaining range, by id.
    pub fn origins(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.heard.iter().map(|(&o, &(t, _))| (o, t))
    }
}

impl NodeProgram for PaddedNode {
    fn init(&mut self, ctx: &NodeContext<'_>, rng: &mut StreamRng) -> Outbox {
        let geo = Geometric::new(self.cfg.p_geom).expect("0 < p_geom <= 1");
        self.radius = (geo.sample(rng) as usize).min(self.cfg.r_cap);
        self.heard.insert(ctx.id, (self.radius, None));
        if self.radius == 0 {
            return Vec::new();
        }
        broadcast(ctx, &encode(&Announce(alloc::vec![(ctx.id as u32, self.radius as u32 - 1)])))
    }

    fn on_round(&mut self, ctx: &NodeContext<'_>, _: usize, inbox: &[Message], _: &mut StreamRng) -> Outbox {
        self.rounds += 1;
        let mut fresh: BTreeMap<VertexId, (usize, VertexId)> = BTreeMap::new();
        for m in inbox {
            let Some(Announce(list)) = decode(&m.payload) else { continue };
            for (origin, left) in list {
                let origin = origin as VertexId;
                if self.heard.contains_key(&origin) || fresh.contains_key(&origin) {
                    continue;
                }
                fresh.insert(origin, (left as usize, m.from));
            }
        }
        let mut forward = Vec::new();
        for (&origin, &(left, from)) in &fresh {
            let dominated = self.heard.range(..origin).any(|(_, &(t, _))| t >= left)
                || fresh.range(..origin).any(|(_, &(t, _))| t >= left);
            if dominated {
                continue;
            }
            self.heard.insert(origin, (left, Some(from)));
            if left > 0 {
                forward.push((origin as u32, left as u32 - 1));
            }
        }
        if forward.is_empty() {
            return Vec::new();
        }
        broadcast(ctx, &encode(&Announce(forward)))
    }

    fn is_done(&self) -> bool {
        self.rounds >= self.cfg.r_cap
    }

    fn output(&self) -> Vec<u8> {
        encode(&(self.center() as u64))
    }
}

/// Runs the protocol inside `session` and returns the per-node states.
pub fn decompose_in(session: &mut Session<'_>, n: usize, cfg: DecompositionConfig) -> Result<Vec<PaddedNode>, SimError> {
    let mut nodes = alloc::vec![PaddedNode::new(cfg); n];
    session.run_to_end("decompose", &mut nodes)?;
    Ok(nodes)
}

/// Samples a partition; returns it with the simulation trace.
pub fn padded_decomposition(
    g: &Graph,
    cfg: DecompositionConfig,
    seed: u64,
) -> Result<(Partition, SimTrace), SimError> {
    let mut session = Session::new(g, seed, cfg.r_cap + 1);
    let nodes = decompose_in(&mut session, g.n(), cfg)?;
    let centers: Vec<VertexId> = nodes.iter().map(|p| p.center()).collect();
    Ok((Partition::from_centers(&centers), session.into_trace()))
}
