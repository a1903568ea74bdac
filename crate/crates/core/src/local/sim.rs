//! Lockstep simulation of the LOCAL model.
//!
//! Every edge is a bidirectional channel. `init` produces the messages
//! delivered in round 1; in round `i` every node receives what was sent to
//! it in round `i - 1` and runs `on_round`. A run halts once every node
//! reports done and no message is in flight, or when the round cap is hit.

use alloc::string::String;
use alloc::vec::Vec;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, Graph, VertexId};
use crate::rng::{self, tag, StreamRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: VertexId,
    pub payload: Vec<u8>,
}

pub type Outbox = Vec<(VertexId, Vec<u8>)>;

/// What a node knows about itself before any communication.
#[derive(Debug, Clone, Copy)]
pub struct NodeContext<'a> {
    pub id: VertexId,
    pub n: usize,
    /// Neighbours in either direction, sorted.
    pub neighbors: &'a [VertexId],
    /// Incident edges with their direction, lengths and costs.
    pub incident: &'a [Edge],
}

pub trait NodeProgram {
    fn init(&mut self, ctx: &NodeContext<'_>, rng: &mut StreamRng) -> Outbox;
    fn on_round(&mut self, ctx: &NodeContext<'_>, round: usize, inbox: &[Message], rng: &mut StreamRng) -> Outbox;
    fn is_done(&self) -> bool;
    fn output(&self) -> Vec<u8> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("node {node} sent to non-neighbour {target} in round {round}")]
    NotNeighbor { node: VertexId, target: VertexId, round: usize },
    #[error("expected {expected} node programs, got {got}")]
    ProgramCount { expected: usize, got: usize },
    #[error("round cap {cap} reached during phase {phase}")]
    RoundCap { cap: usize, phase: String },
    #[error("node {node} received a malformed message in round {round}")]
    Malformed { node: VertexId, round: usize },
    #[error("{0}")]
    Algorithm(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub phase: usize,
    pub messages: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRecord {
    pub name: String,
    pub rounds: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTrace {
    pub rounds_used: usize,
    pub records: Vec<RoundRecord>,
    pub phases: Vec<PhaseRecord>,
    /// Per-node output of the last phase.
    pub outputs: Vec<Vec<u8>>,
    /// False if the round cap cut a phase short.
    pub completed: bool,
}

pub fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    postcard::to_allocvec(value).expect("in-memory encoding does not fail")
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Option<T> {
    postcard::from_bytes(bytes).ok()
}

/// The stream a node draws from in a given (global) round.
pub fn node_stream(seed: u64, node: VertexId, round: usize) -> StreamRng {
    rng::derived_stream(rng::derive(seed, tag::NODE, node as u64), tag::ITERATION, round as u64)
}

/// Runs several phases back to back on one network, accumulating one trace.
/// Node programs of a phase are owned by the caller, so a node's state can
/// seed its program for the next phase.
pub struct Session<'g> {
    graph: &'g Graph,
    seed: u64,
    max_rounds: usize,
    neighbors: Vec<Vec<VertexId>>,
    incident: Vec<Vec<Edge>>,
    trace: SimTrace,
}

impl<'g> Session<'g> {
    pub fn new(graph: &'g Graph, seed: u64, max_rounds: usize) -> Self {
        let n = graph.n();
        let neighbors = (0..n).map(|u| graph.undirected_neighbors(u)).collect();
        let mut incident = alloc::vec![Vec::new(); n];
        for e in graph.edges() {
            incident[e.tail].push(*e);
            incident[e.head].push(*e);
        }
        Session {
            graph,
            seed,
            max_rounds,
            neighbors,
            incident,
            trace: SimTrace { completed: true, ..SimTrace::default() },
        }
    }

    pub fn rounds_used(&self) -> usize {
        self.trace.rounds_used
    }

    pub fn trace(&self) -> &SimTrace {
        &self.trace
    }

    pub fn into_trace(self) -> SimTrace {
        self.trace
    }

    fn context(&self, u: VertexId) -> NodeContext<'_> {
        NodeContext { id: u, n: self.graph.n(), neighbors: &self.neighbors[u], incident: &self.incident[u] }
    }

    fn route(&self, from: VertexId, round: usize, out: Outbox, pending: &mut [Vec<Message>]) -> Result<(), SimError> {
        for (to, payload) in out {
            if self.neighbors[from].binary_search(&to).is_err() {
                return Err(SimError::NotNeighbor { node: from, target: to, round });
            }
            pending[to].push(Message { from, payload });
        }
        Ok(())
    }

    /// Runs one phase to completion. Returns the rounds it took; hitting the
    /// session's round cap stops the phase and clears `completed`.
    pub fn run<P: NodeProgram>(&mut self, name: &str, programs: &mut [P]) -> Result<usize, SimError> {
        let n = self.graph.n();
        if programs.len() != n {
            return Err(SimError::ProgramCount { expected: n, got: programs.len() });
        }
        let phase = self.trace.phases.len();
        let start = self.trace.rounds_used;
        let mut pending: Vec<Vec<Message>> = alloc::vec![Vec::new(); n];
        for (u, p) in programs.iter_mut().enumerate() {
            let mut rng = node_stream(self.seed, u, start);
            let out = p.init(&self.context(u), &mut rng);
            self.route(u, start, out, &mut pending)?;
        }
        loop {
            let in_flight = pending.iter().any(|q| !q.is_empty());
            if !in_flight && programs.iter().all(|p| p.is_done()) {
                break;
            }
            if self.trace.rounds_used >= self.max_rounds {
                self.trace.completed = false;
                break;
            }
            self.trace.rounds_used += 1;
            let round = self.trace.rounds_used;
            let mut inboxes: Vec<Vec<Message>> = pending.iter_mut().map(core::mem::take).collect();
            let messages = inboxes.iter().map(|q| q.len()).sum();
            let bytes = inboxes.iter().flatten().map(|m| m.payload.len()).sum();
            self.trace.records.push(RoundRecord { round, phase, messages, bytes });
            for (u, p) in programs.iter_mut().enumerate() {
                let inbox = &mut inboxes[u];
                inbox.sort_by_key(|m| m.from);
                let mut rng = node_stream(self.seed, u, round);
                let out = p.on_round(&self.context(u), round - start, inbox, &mut rng);
                self.route(u, round, out, &mut pending)?;
            }
        }
        let rounds = self.trace.rounds_used - start;
        self.trace.phases.push(PhaseRecord { name: name.into(), rounds });
        self.trace.outputs = programs.iter().map(|p| p.output()).collect();
        Ok(rounds)
    }

    /// Like [`run`](Self::run) but fails if the round cap was hit.
    pub fn run_to_end<P: NodeProgram>(&mut self, name: &str, programs: &mut [P]) -> Result<usize, SimError> {
        let rounds = self.run(name, programs)?;
        if !self.trace.completed {
            return Err(SimError::RoundCap { cap: self.max_rounds, phase: name.into() });
        }
        Ok(rounds)
    }
}

/// A single-phase simulation.
pub fn run_simulation<P: NodeProgram>(
    g: &Graph,
    programs: &mut [P],
    max_rounds: usize,
    seed: u64,
) -> Result<SimTrace, SimError> {
    let mut session = Session::new(g, seed, max_rounds);
    session.run("main", programs)?;
    Ok(session.into_trace())
}

/// Sends `payload` to every neighbour.
pub fn broadcast(ctx: &NodeContext<'_>, payload: &[u8]) -> Outbox {
    ctx.neighbors.iter().map(|&v| (v, payload.to_vec())).collect()
}
