//! Distributed fault-tolerant conversion.
//!
//! Every iteration runs a distributed base spanner in a fixed number of
//! rounds. Before the first round each vertex decides locally whether it
//! joins the sampled set `J`; members of `J` stay silent for the whole
//! iteration, which removes them from the base run. Edges are only ever kept
//! towards neighbours heard from in the same iteration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sim::{broadcast, decode, encode, Message, NodeContext, NodeProgram, Outbox, Session, SimError, SimTrace};
use crate::convert::{ConversionConfig, ConvertError};
use crate::graph::{FaultSet, Graph, VertexId};
use crate::rng::StreamRng;
use crate::spanner::{Spanner, SpannerMeta};

/// A distributed k-spanner routine with a fixed round count.
pub trait DistributedBase {
    type Node: NodeProgram + Clone;

    fn name(&self) -> &str;

    /// Rounds one run takes for stretch `k`.
    fn rounds(&self, k: u32) -> usize;

    fn check(&self, g: &Graph, k: u32) -> Result<(), ConvertError>;

    fn spawn(&self, k: u32) -> Self::Node;

    /// Neighbours whose connecting edge `node` keeps.
    fn kept(&self, node: &Self::Node) -> Vec<VertexId>;
}

#[derive(Serialize, Deserialize)]
enum ClusterMsg {
    Flood(Vec<(u32, u32)>),
    Center(u32),
}

/// Clustering spanner for unit-length undirected graphs and odd `k >= 3`.
///
/// Every vertex floods its id for `rho = (k - 1) / 2` hops and joins the
/// smallest id it hears; it keeps the edge towards its center. In one more
/// round neighbours exchange centers and each vertex keeps one edge (to the
/// smallest neighbour) into every other adjacent cluster.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClusterSpanner;

#[derive(Debug, Clone, Default)]
pub struct ClusterNode {
    rho: usize,
    rounds: usize,
    /// origin -> (remaining range, first sender)
    heard: BTreeMap<VertexId, (usize, Option<VertexId>)>,
    kept: BTreeSet<VertexId>,
}

impl ClusterNode {
    pub fn center(&self) -> VertexId {
        *self.heard.keys().next().expect("a node always hears itself")
    }
}

impl NodeProgram for ClusterNode {
    fn init(&mut self, ctx: &NodeContext<'_>, _: &mut StreamRng) -> Outbox {
        self.heard.insert(ctx.id, (self.rho, None));
        if self.rho == 0 {
            return broadcast(ctx, &encode(&ClusterMsg::Center(ctx.id as u32)));
        }
        broadcast(ctx, &encode(&ClusterMsg::Flood(alloc::vec![(ctx.id as u32, self.rho as u32 - 1)])))
    }

    fn on_round(&mut self, ctx: &NodeContext<'_>, round: usize, inbox: &[Message], _: &mut StreamRng) -> Outbox {
        self.rounds = round;
        if round > self.rho {
            let mut seen = BTreeSet::new();
            let own = self.center();
            for m in inbox {
                if let Some(ClusterMsg::Center(c)) = decode(&m.payload) {
                    // inbox is sorted by sender, so the first one per cluster is the smallest
                    if c as VertexId != own && seen.insert(c) {
                        self.kept.insert(m.from);
                    }
                }
            }
            return Vec::new();
        }
        let mut fresh: BTreeMap<VertexId, (usize, VertexId)> = BTreeMap::new();
        for m in inbox {
            let Some(ClusterMsg::Flood(list)) = decode(&m.payload) else { continue };
            for (origin, left) in list {
                let origin = origin as VertexId;
                if !self.heard.contains_key(&origin) && !fresh.contains_key(&origin) {
                    fresh.insert(origin, (left as usize, m.from));
                }
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
        if round == self.rho {
            let c = self.center();
            if let Some(&(_, Some(p))) = self.heard.get(&c) {
                self.kept.insert(p);
            }
            return broadcast(ctx, &encode(&ClusterMsg::Center(c as u32)));
        }
        if forward.is_empty() {
            return Vec::new();
        }
        broadcast(ctx, &encode(&ClusterMsg::Flood(forward)))
    }

    fn is_done(&self) -> bool {
        self.rounds > self.rho
    }
}

impl DistributedBase for ClusterSpanner {
    type Node = ClusterNode;

    fn name(&self) -> &str {
        "cluster"
    }

    fn rounds(&self, k: u32) -> usize {
        (k as usize - 1) / 2 + 1
    }

    fn check(&self, g: &Graph, k: u32) -> Result<(), ConvertError> {
        if k < 3 || k % 2 == 0 {
            return Err(ConvertError::InvalidStretch(k));
        }
        if g.directed() || !g.is_unit_length() {
            return Err(ConvertError::InvalidConfig("the clustering spanner needs an undirected unit-length graph"));
        }
        Ok(())
    }

    fn spawn(&self, k: u32) -> ClusterNode {
        ClusterNode { rho: (k as usize - 1) / 2, ..ClusterNode::default() }
    }

    fn kept(&self, node: &ClusterNode) -> Vec<VertexId> {
        node.kept.iter().copied().collect()
    }
}

/// Wraps a base node with the local decision to join `J`.
#[derive(Debug, Clone)]
pub struct ConversionNode<N> {
    inner: N,
    join_prob: f64,
    in_j: bool,
    rounds: usize,
    schedule: usize,
    heard: BTreeSet<VertexId>,
}

impl<N: NodeProgram> NodeProgram for ConversionNode<N> {
    fn init(&mut self, ctx: &NodeContext<'_>, rng: &mut StreamRng) -> Outbox {
        self.in_j = self.join_prob > 0.0 && rng.random::<f64>() < self.join_prob;
        if self.in_j {
            return Vec::new();
        }
        self.inner.init(ctx, rng)
    }

    fn on_round(&mut self, ctx: &NodeContext<'_>, round: usize, inbox: &[Message], rng: &mut StreamRng) -> Outbox {
        self.rounds = round;
        if self.in_j {
            return Vec::new();
        }
        self.heard.extend(inbox.iter().map(|m| m.from));
        self.inner.on_round(ctx, round, inbox, rng)
    }

    fn is_done(&self) -> bool {
        self.rounds >= self.schedule
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistConvertOutcome {
    pub spanner: Spanner,
    pub trace: SimTrace,
    /// The sampled set `J` of every iteration.
    pub sampled: Vec<FaultSet>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistConvertError {
    #[error(transparent)]
    Config(#[from] ConvertError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Runs `cfg.iterations` iterations of `base` (one when `r = 0`) with the
/// per-vertex sampling of `J`. The simulation seed is `cfg.seed`.
pub fn distributed_ft_convert<B: DistributedBase>(
    g: &Graph,
    k: u32,
    cfg: &ConversionConfig,
    base: &B,
) -> Result<DistConvertOutcome, DistConvertError> {
    cfg.validate()?;
    base.check(g, k)?;
    if cfg.r >= g.n() && g.n() > 0 {
        return Err(ConvertError::FaultBudgetTooLarge { r: cfg.r, n: g.n() }.into());
    }
    let (iterations, p) = if cfg.r == 0 { (1, 0.0) } else { (cfg.iterations, cfg.sample_keep_prob) };
    let per = base.rounds(k);
    let mut session = Session::new(g, cfg.seed, iterations * per);
    let mut kept = BTreeSet::new();
    let mut sampled = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut nodes: Vec<ConversionNode<B::Node>> = (0..g.n())
            .map(|_| ConversionNode {
                inner: base.spawn(k),
                join_prob: p,
                in_j: false,
                rounds: 0,
                schedule: per,
                heard: BTreeSet::new(),
            })
            .collect();
        session.run_to_end("base", &mut nodes)?;
        sampled.push(FaultSet::new(nodes.iter().enumerate().filter(|(_, x)| x.in_j).map(|(v, _)| v)));
        for (u, node) in nodes.iter().enumerate() {
            if node.in_j {
                continue;
            }
            for v in base.kept(&node.inner) {
                if node.heard.contains(&v) {
                    kept.insert(g.edge_between(u, v).expect("kept edges join neighbours"));
                }
            }
        }
    }
    let mut trace = session.into_trace();
    trace.outputs = Vec::new();
    let meta = SpannerMeta::new("ft-dist", k, cfg.r, cfg.seed);
    Ok(DistConvertOutcome { spanner: Spanner::new(kept, meta), trace, sampled })
}
