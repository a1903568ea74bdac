//! Distributed O(log n)-approximation for minimum-cost r-fault-tolerant
//! 2-spanners.
//!
//! Each of `t` iterations samples a padded decomposition, gathers the
//! neighbourhood graph of every cluster at its center, solves the cluster LP
//! there and floods the solution back. Every edge then averages the values of
//! the iterations in which both endpoints shared a cluster, and the result is
//! rounded with vertex thresholds in two more rounds.
//!
//! Phase schedule per iteration, all fixed length: decomposition (`r_cap`),
//! neighbour exchange (1), upcast along parent pointers (`r_cap`), downcast
//! of the solution (`r_cap`).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::padded::{decompose_in, DecompositionConfig, PaddedNode, Partition};
use super::sim::{broadcast, decode, encode, Message, NodeContext, NodeProgram, Outbox, Session, SimError, SimTrace};
use crate::graph::{Edge, EdgeId, Graph, VertexId};
use crate::lp::{
    build_base_lp, capacity_violation, separation_oracle, solve_lp, solve_model, FractionalSolution, LpModel,
    LpModelError, SolveError, SolveOptions,
};
use crate::oracle::verify_ft2_char_mask;
use crate::rng::StreamRng;
use crate::spanner::{Spanner, SpannerMeta};

/// The cluster LP: the relaxation on the subgraph induced by the cluster and
/// its neighbours, paying only for edges inside the cluster.
#[derive(Debug, Clone)]
pub struct ClusterLp {
    pub center: VertexId,
    pub members: Vec<VertexId>,
    /// Cluster plus neighbours, sorted.
    pub vertices: Vec<VertexId>,
    /// On the host id space; vertices outside `vertices` are isolated.
    pub graph: Graph,
    pub model: LpModel,
}

impl ClusterLp {
    /// Builds the cluster LP from the cluster's members and any superset of
    /// the edges of the induced neighbourhood graph, given as
    /// `(tail, head, cost)`.
    pub fn from_edges(
        n: usize,
        center: VertexId,
        members: &[VertexId],
        edges: &[(VertexId, VertexId, f64)],
        r: usize,
    ) -> Result<Self, LpModelError> {
        let inside: BTreeSet<VertexId> = members.iter().copied().collect();
        let mut span = inside.clone();
        for &(a, b, _) in edges {
            if inside.contains(&a) || inside.contains(&b) {
                span.insert(a);
                span.insert(b);
            }
        }
        let kept: BTreeMap<(VertexId, VertexId), f64> = edges
            .iter()
            .filter(|(a, b, _)| span.contains(a) && span.contains(b))
            .map(|&(a, b, c)| ((a, b), if inside.contains(&a) && inside.contains(&b) { c } else { 0.0 }))
            .collect();
        let graph = Graph::new(n, true, kept.iter().map(|(&(a, b), &c)| Edge::new(a, b, 1.0, c)))
            .expect("cluster edges come from a valid graph");
        let model = crate::lp::build_base_lp(&graph, r)?;
        Ok(ClusterLp { center, members: inside.into_iter().collect(), vertices: span.into_iter().collect(), graph, model })
    }

    pub fn is_internal(&self, e: EdgeId) -> bool {
        let ed = self.graph.edge(e);
        self.members.binary_search(&ed.tail).is_ok() && self.members.binary_search(&ed.head).is_ok()
    }

    pub fn solve(&mut self, opts: &SolveOptions) -> Result<FractionalSolution, SolveError> {
        solve_model(&mut self.model, opts)
    }
}

/// The cluster LP for `partition.clusters[cluster]`, read off the host graph.
pub fn lp_for_cluster(g: &Graph, partition: &Partition, cluster: usize, r: usize) -> Result<ClusterLp, LpModelError> {
    if !g.directed() {
        return Err(LpModelError::UndirectedInput);
    }
    let c = &partition.clusters[cluster];
    let edges: Vec<_> = g.edges().iter().map(|e| (e.tail, e.head, e.cost)).collect();
    ClusterLp::from_edges(g.n(), c.center, &c.members, &edges, r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistFt2Config {
    pub r: usize,
    /// Iterations; 0 means `ceil(c_t ln n)`.
    pub iterations: usize,
    pub c_t: f64,
    pub decomposition: DecompositionConfig,
    pub c_alpha: f64,
    pub lp: SolveOptions,
    /// Central LP value for the report; solved on the host when absent.
    pub reference_lp: Option<f64>,
    /// Hard cap on simulated rounds; 0 means the schedule length.
    pub max_rounds: usize,
}

impl DistFt2Config {
    pub fn new(n: usize, r: usize) -> Self {
        DistFt2Config {
            r,
            iterations: 0,
            c_t: 4.0,
            decomposition: DecompositionConfig::for_n(n),
            c_alpha: 3.0,
            lp: SolveOptions::default(),
            reference_lp: None,
            max_rounds: 0,
        }
    }

    pub fn iteration_count(&self, n: usize) -> usize {
        if self.iterations > 0 {
            self.iterations
        } else {
            (libm::ceil(self.c_t * libm::log(n.max(2) as f64)) as usize).max(1)
        }
    }

    /// Rounds the fixed schedule takes.
    pub fn schedule_rounds(&self, n: usize) -> usize {
        self.iteration_count(n) * (3 * self.decomposition.r_cap + 1) + 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistFt2Report {
    pub iterations: usize,
    pub rounds_used: usize,
    pub alpha: f64,
    /// Central LP value.
    pub lp_value: f64,
    /// Sum of `cost * x~`.
    pub averaged_cost: f64,
    /// Sum over clusters of the cluster LP values, per iteration.
    pub cluster_lp_sums: Vec<f64>,
    pub cost: f64,
    pub ratio: f64,
    /// Whether the rounded set passes the characterization check.
    pub valid: bool,
    /// Largest violation of the relaxation by `x~` with flows averaged over
    /// fully padded iterations; 0 when feasible.
    pub residual_violation: f64,
    /// Smallest number of iterations in which an edge's tail and all its
    /// neighbours shared a cluster.
    pub min_padded_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistFt2Outcome {
    pub spanner: Spanner,
    pub averaged: Vec<f64>,
    pub trace: SimTrace,
    pub report: DistFt2Report,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] LpModelError),
    #[error("cluster LP failed in iteration {iteration} at center {center}: {source}")]
    ClusterLp { iteration: usize, center: VertexId, source: SolveError },
    #[error("central LP failed: {0}")]
    Central(SolveError),
    #[error("{0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct EdgeRec(u32, u32, f64);

fn rec(e: &Edge) -> EdgeRec {
    EdgeRec(e.tail as u32, e.head as u32, e.cost)
}

/// One round: tell every neighbour our center and incident edges.
#[derive(Debug, Clone, Default)]
struct ExchangeNode {
    center: VertexId,
    done: bool,
    neighbor_center: BTreeMap<VertexId, VertexId>,
    known: BTreeSet<(u32, u32, u64)>,
}

impl NodeProgram for ExchangeNode {
    fn init(&mut self, ctx: &NodeContext<'_>, _: &mut StreamRng) -> Outbox {
        let own: Vec<EdgeRec> = ctx.incident.iter().map(rec).collect();
        for e in &own {
            self.known.insert((e.0, e.1, e.2.to_bits()));
        }
        broadcast(ctx, &encode(&(self.center as u32, own)))
    }

    fn on_round(&mut self, _: &NodeContext<'_>, _: usize, inbox: &[Message], _: &mut StreamRng) -> Outbox {
        for m in inbox {
            if let Some((c, edges)) = decode::<(u32, Vec<EdgeRec>)>(&m.payload) {
                self.neighbor_center.insert(m.from, c as VertexId);
                for e in edges {
                    self.known.insert((e.0, e.1, e.2.to_bits()));
                }
            }
        }
        self.done = true;
        Vec::new()
    }

    fn is_done(&self) -> bool {
        self.done
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Bundle {
    member: u32,
    center: u32,
    edges: Vec<EdgeRec>,
}

/// Convergecast of every member's bundle to its center along parent
/// pointers.
#[derive(Debug, Clone)]
struct UpcastNode {
    parents: BTreeMap<VertexId, VertexId>,
    own: Option<Bundle>,
    collected: Vec<Bundle>,
    rounds: usize,
    r_cap: usize,
}

impl UpcastNode {
    fn route(&mut self, id: VertexId, bundles: Vec<Bundle>) -> Outbox {
        let mut out: BTreeMap<VertexId, Vec<Bundle>> = BTreeMap::new();
        for b in bundles {
            let c = b.center as VertexId;
            if c == id {
                self.collected.push(b);
            } else if let Some(&p) = self.parents.get(&c) {
                out.entry(p).or_default().push(b);
            }
        }
        out.into_iter().map(|(p, list)| (p, encode(&list))).collect()
    }
}

impl NodeProgram for UpcastNode {
    fn init(&mut self, ctx: &NodeContext<'_>, _: &mut StreamRng) -> Outbox {
        let own = self.own.take().into_iter().collect();
        self.route(ctx.id, own)
    }

    fn on_round(&mut self, ctx: &NodeContext<'_>, _: usize, inbox: &[Message], _: &mut StreamRng) -> Outbox {
        self.rounds += 1;
        let incoming: Vec<Bundle> = inbox.iter().filter_map(|m| decode::<Vec<Bundle>>(&m.payload)).flatten().collect();
        self.route(ctx.id, incoming)
    }

    fn is_done(&self) -> bool {
        self.rounds >= self.r_cap
    }
}

/// Cluster LP solution as shipped to members: values on internal edges and
/// on the paths of internal demands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSolution {
    pub center: u32,
    pub value: f64,
    pub x: Vec<(u32, u32, f64)>,
    pub f: Vec<(u32, u32, u32, f64)>,
}

impl ClusterSolution {
    fn x_of(&self, u: VertexId, v: VertexId) -> Option<f64> {
        self.x
            .binary_search_by(|&(a, b, _)| (a as VertexId, b as VertexId).cmp(&(u, v)))
            .ok()
            .map(|i| self.x[i].2)
    }
}

fn solve_cluster(
    n: usize,
    center: VertexId,
    bundles: &[Bundle],
    r: usize,
    opts: &SolveOptions,
) -> Result<ClusterSolution, SolveError> {
    let members: Vec<VertexId> = bundles.iter().map(|b| b.member as VertexId).collect();
    let edges: BTreeMap<(VertexId, VertexId), f64> = bundles
        .iter()
        .flat_map(|b| b.edges.iter())
        .map(|e| ((e.0 as VertexId, e.1 as VertexId), e.2))
        .collect();
    let list: Vec<_> = edges.iter().map(|(&(a, b), &c)| (a, b, c)).collect();
    let mut lp = ClusterLp::from_edges(n, center, &members, &list, r)?;
    let sol = lp.solve(opts)?;
    let mut x = Vec::new();
    let mut internal = alloc::vec![false; lp.graph.num_edges()];
    for id in lp.graph.edge_ids() {
        if lp.is_internal(id) {
            internal[id.0] = true;
            let e = lp.graph.edge(id);
            x.push((e.tail as u32, e.head as u32, sol.x[id.0]));
        }
    }
    x.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let f = lp
        .model
        .paths()
        .iter()
        .zip(&sol.f)
        .filter(|(p, _)| internal[p.demand.0])
        .map(|(p, &v)| (p.path.tail as u32, p.path.mid as u32, p.path.head as u32, v))
        .collect();
    Ok(ClusterSolution { center: center as u32, value: sol.objective_value, x, f })
}

/// Flooding of each center's solution; nodes that relayed the center's id
/// in the decomposition relay the solution.
#[derive(Debug, Clone)]
struct DowncastNode {
    own_center: VertexId,
    /// origin -> remaining range, for origins kept during the decomposition
    relays: BTreeMap<VertexId, usize>,
    /// Set at centers: the solution computed from the collected bundles.
    solved: Option<ClusterSolution>,
    rounds: usize,
    r_cap: usize,
    forwarded: BTreeSet<VertexId>,
    received: Option<ClusterSolution>,
}

impl NodeProgram for DowncastNode {
    fn init(&mut self, ctx: &NodeContext<'_>, _: &mut StreamRng) -> Outbox {
        let Some(sol) = &self.solved else { return Vec::new() };
        if self.own_center == ctx.id {
            self.received = Some(sol.clone());
        }
        self.forwarded.insert(ctx.id);
        if self.relays.get(&ctx.id).copied().unwrap_or(0) > 0 {
            broadcast(ctx, &encode(sol))
        } else {
            Vec::new()
        }
    }

    fn on_round(&mut self, ctx: &NodeContext<'_>, _: usize, inbox: &[Message], _: &mut StreamRng) -> Outbox {
        self.rounds += 1;
        let mut out = Vec::new();
        for m in inbox {
            let Some(sol) = decode::<ClusterSolution>(&m.payload) else { continue };
            let c = sol.center as VertexId;
            if !self.forwarded.insert(c) {
                continue;
            }
            if c == self.own_center {
                self.received = Some(sol.clone());
            }
            if self.relays.get(&c).copied().unwrap_or(0) > 0 {
                out.extend(broadcast(ctx, &m.payload));
            }
        }
        out
    }

    fn is_done(&self) -> bool {
        self.rounds >= self.r_cap
    }
}

/// What a node remembers from one iteration.
#[derive(Debug, Clone)]
struct IterationMemory {
    center: VertexId,
    neighbor_center: BTreeMap<VertexId, VertexId>,
    solution: ClusterSolution,
}

/// Two rounds: exchange thresholds, then tails tell heads which edges were
/// kept.
#[derive(Debug, Clone)]
struct RoundingNode {
    /// out-edge head -> averaged value
    out_values: BTreeMap<VertexId, f64>,
    alpha: f64,
    threshold: f64,
    rounds: usize,
    kept_out: BTreeSet<VertexId>,
    kept_in: BTreeSet<VertexId>,
}

impl NodeProgram for RoundingNode {
    fn init(&mut self, ctx: &NodeContext<'_>, rng: &mut StreamRng) -> Outbox {
        self.threshold = rng.random::<f64>();
        broadcast(ctx, &encode(&self.threshold))
    }

    fn on_round(&mut self, _: &NodeContext<'_>, round: usize, inbox: &[Message], _: &mut StreamRng) -> Outbox {
        self.rounds = round;
        if round == 1 {
            let theirs: BTreeMap<VertexId, f64> =
                inbox.iter().filter_map(|m| decode::<f64>(&m.payload).map(|t| (m.from, t))).collect();
            let mut out = Vec::new();
            for (&v, &x) in &self.out_values {
                let tv = theirs.get(&v).copied().unwrap_or(1.0);
                if self.threshold.min(tv) <= self.alpha * x {
                    self.kept_out.insert(v);
                    out.push((v, encode(&true)));
                }
            }
            out
        } else {
            for m in inbox {
                if decode::<bool>(&m.payload) == Some(true) {
                    self.kept_in.insert(m.from);
                }
            }
            Vec::new()
        }
    }

    fn is_done(&self) -> bool {
        self.rounds >= 2
    }

    fn output(&self) -> Vec<u8> {
        encode(&self.kept_out.iter().map(|&v| v as u32).collect::<Vec<_>>())
    }
}

/// Runs the distributed algorithm on a directed unit-length graph.
pub fn distributed_ft2(g: &Graph, cfg: &DistFt2Config, seed: u64) -> Result<DistFt2Outcome, DistError> {
    if !g.directed() {
        return Err(LpModelError::UndirectedInput.into());
    }
    if !g.is_unit_length() {
        return Err(LpModelError::NonUnitLength.into());
    }
    let n = g.n();
    let t = cfg.iteration_count(n);
    let r_cap = cfg.decomposition.r_cap;
    let cap = if cfg.max_rounds > 0 { cfg.max_rounds } else { cfg.schedule_rounds(n) };
    let mut session = Session::new(g, seed, cap);
    let mut memory: Vec<Vec<IterationMemory>> = alloc::vec![Vec::new(); n];
    let mut cluster_lp_sums = Vec::with_capacity(t);
    // a center that collects the same input twice recomputes the same answer
    let mut cache: BTreeMap<CacheKey, ClusterSolution> = BTreeMap::new();

    for iteration in 0..t {
        let padded = decompose_in(&mut session, n, cfg.decomposition)?;
        let mut exchange: Vec<ExchangeNode> =
            padded.iter().map(|p| ExchangeNode { center: p.center(), ..ExchangeNode::default() }).collect();
        session.run_to_end("exchange", &mut exchange)?;

        let mut upcast: Vec<UpcastNode> = padded
            .iter()
            .zip(&exchange)
            .enumerate()
            .map(|(v, (p, ex))| UpcastNode {
                parents: parent_map(p),
                own: Some(Bundle {
                    member: v as u32,
                    center: p.center() as u32,
                    edges: ex.known.iter().map(|&(a, b, c)| EdgeRec(a, b, f64::from_bits(c))).collect(),
                }),
                collected: Vec::new(),
                rounds: 0,
                r_cap,
            })
            .collect();
        session.run_to_end("upcast", &mut upcast)?;

        // local computation at the centers
        let mut sum = 0.0;
        let mut solved: Vec<Option<ClusterSolution>> = alloc::vec![None; n];
        for (v, up) in upcast.iter().enumerate() {
            if up.collected.is_empty() {
                continue;
            }
            let key = cache_key(v, &up.collected);
            let sol = match cache.get(&key) {
                Some(sol) => sol.clone(),
                None => {
                    let sol = solve_cluster(n, v, &up.collected, cfg.r, &cfg.lp)
                        .map_err(|source| DistError::ClusterLp { iteration, center: v, source })?;
                    cache.insert(key, sol.clone());
                    sol
                }
            };
            sum += sol.value;
            solved[v] = Some(sol);
        }

        let mut downcast: Vec<DowncastNode> = padded
            .iter()
            .zip(solved)
            .map(|(p, solved)| DowncastNode {
                own_center: p.center(),
                relays: relay_ranges(p),
                solved,
                rounds: 0,
                r_cap,
                forwarded: BTreeSet::new(),
                received: None,
            })
            .collect();
        session.run_to_end("downcast", &mut downcast)?;

        cluster_lp_sums.push(sum);
        for (v, node) in downcast.into_iter().enumerate() {
            let solution = node.received.ok_or_else(|| {
                SimError::Algorithm(format!("node {v} missed its cluster solution in iteration {iteration}"))
            })?;
            memory[v].push(IterationMemory {
                center: padded[v].center(),
                neighbor_center: core::mem::take(&mut exchange[v].neighbor_center),
                solution,
            });
        }
    }

    // each tail averages over iterations where the head shared its cluster
    let scale = 4.0 / t as f64;
    let mut averaged = alloc::vec![0.0; g.num_edges()];
    for (i, e) in g.edges().iter().enumerate() {
        let total: f64 = memory[e.tail]
            .iter()
            .filter(|m| m.neighbor_center.get(&e.head) == Some(&m.center))
            .map(|m| m.solution.x_of(e.tail, e.head).unwrap_or(0.0))
            .sum();
        averaged[i] = (scale * total).min(1.0);
    }

    let alpha = cfg.c_alpha * libm::log(n.max(2) as f64);
    let mut rounding: Vec<RoundingNode> = (0..n)
        .map(|u| RoundingNode {
            out_values: g.out_neighbors(u).iter().map(|&(v, id)| (v, averaged[id.0])).collect(),
            alpha,
            threshold: 1.0,
            rounds: 0,
            kept_out: BTreeSet::new(),
            kept_in: BTreeSet::new(),
        })
        .collect();
    session.run_to_end("rounding", &mut rounding)?;

    let mut mask = alloc::vec![false; g.num_edges()];
    for (u, node) in rounding.iter().enumerate() {
        for &v in &node.kept_out {
            mask[g.edge_between(u, v).expect("kept edge exists").0] = true;
        }
    }
    let spanner = Spanner::new(
        mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| EdgeId(i)),
        SpannerMeta::new("distributed-ft2", 2, cfg.r, seed),
    );
    let cost = spanner.cost(g);
    let lp_value = match cfg.reference_lp {
        Some(v) => v,
        None => solve_lp(g, cfg.r, &cfg.lp).map_err(DistError::Central)?.objective_value,
    };
    let averaged_cost: f64 = averaged.iter().zip(g.edges()).map(|(x, e)| x * e.cost).sum();
    let (residual_violation, min_padded_iterations) = averaged_feasibility(g, cfg.r, &averaged, &memory)?;
    let report = DistFt2Report {
        iterations: t,
        rounds_used: session.rounds_used(),
        alpha,
        lp_value,
        averaged_cost,
        cluster_lp_sums,
        cost,
        ratio: crate::round::threshold::ratio(cost, lp_value),
        valid: verify_ft2_char_mask(g, &mask, cfg.r).ok,
        residual_violation,
        min_padded_iterations,
    };
    let mut trace = session.into_trace();
    trace.outputs = rounding.iter().map(|p| p.output()).collect();
    Ok(DistFt2Outcome { spanner, averaged, trace, report })
}

type CacheKey = (VertexId, Vec<u32>, Vec<(u32, u32, u64)>);

fn cache_key(center: VertexId, bundles: &[Bundle]) -> CacheKey {
    let mut members: Vec<u32> = bundles.iter().map(|b| b.member).collect();
    members.sort_unstable();
    let edges: BTreeSet<(u32, u32, u64)> =
        bundles.iter().flat_map(|b| b.edges.iter()).map(|e| (e.0, e.1, e.2.to_bits())).collect();
    (center, members, edges.into_iter().collect())
}

fn parent_map(p: &PaddedNode) -> BTreeMap<VertexId, VertexId> {
    relay_ranges(p).keys().filter_map(|&o| p.parent(o).map(|q| (o, q))).collect()
}

fn relay_ranges(p: &PaddedNode) -> BTreeMap<VertexId, usize> {
    p.origins().map(|(o, range)| (o, range)).collect()
}

/// Checks `x~` against the relaxation with flows averaged over the
/// iterations in which the tail and all its neighbours shared a cluster.
fn averaged_feasibility(
    g: &Graph,
    r: usize,
    averaged: &[f64],
    memory: &[Vec<IterationMemory>],
) -> Result<(f64, usize), DistError> {
    let mut model = build_base_lp(g, r)?;
    model.set_presolve(false);
    let mut f = alloc::vec![0.0; model.num_paths()];
    let mut min_padded = usize::MAX;
    for id in g.edge_ids() {
        let e = g.edge(id);
        let padded: Vec<&IterationMemory> =
            memory[e.tail].iter().filter(|m| m.neighbor_center.values().all(|&c| c == m.center)).collect();
        min_padded = min_padded.min(padded.len());
        if padded.is_empty() {
            continue;
        }
        for i in model.demand_range(id) {
            let p = model.paths()[i].path;
            let key = (p.tail as u32, p.mid as u32, p.head as u32);
            let total: f64 = padded
                .iter()
                .filter_map(|m| m.solution.f.iter().find(|&&(a, b, c, _)| (a, b, c) == key).map(|q| q.3))
                .sum();
            f[i] = total / padded.len() as f64;
        }
    }
    let cuts = separation_oracle(&model, averaged, &f, 0.0);
    let worst = cuts.iter().map(|c| c.violation).fold(0.0, f64::max).max(capacity_violation(&model, averaged, &f));
    Ok((worst, if g.num_edges() == 0 { 0 } else { min_padded }))
}
