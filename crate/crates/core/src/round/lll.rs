//! Moser–Tardos resampling for unit-cost graphs of bounded degree.
//!
//! Two kinds of bad events over the vertex thresholds: an edge left
//! unsatisfied by the rounded set, and a vertex charged for too many rounded
//! edges. While some event occurs, the lowest one (edge events by id, then
//! vertex events by id) has its variables redrawn.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;

use super::threshold::{mask_to_spanner, ratio, round_thresholds, RoundError, Rounded, RoundingConfig, RoundingReport, ThresholdAssignment};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::lp::solve_lp;
use crate::rng::{self, tag};
use crate::spanner::SpannerMeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BadEvent {
    /// The edge is not kept and has fewer than `r + 1` kept length-two paths.
    Unsatisfied(EdgeId),
    /// The vertex's charge exceeds `4 alpha` times its incident capacity.
    Overloaded(VertexId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LllTrace {
    /// Events in the order they were resampled.
    pub events: Vec<BadEvent>,
}

impl LllTrace {
    pub fn resamples(&self) -> usize {
        self.events.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LllOutcome {
    pub rounded: Rounded,
    pub thresholds: ThresholdAssignment,
    pub trace: LllTrace,
}

/// `Z_u^+ + Z_u^-` per vertex: out-edges `(u, v)` and in-edges `(v, u)` of
/// `u` whose other endpoint's threshold is at most `alpha * x`.
pub fn charges(g: &Graph, x: &[f64], alpha: f64, t: &[f64]) -> Vec<usize> {
    let mut z = alloc::vec![0usize; g.n()];
    for (e, &xe) in g.edges().iter().zip(x) {
        let bar = alpha * xe;
        if t[e.head] <= bar {
            z[e.tail] += 1;
        }
        if t[e.tail] <= bar {
            z[e.head] += 1;
        }
    }
    z
}

/// `4 alpha` times the total capacity on edges incident to each vertex.
pub fn charge_bounds(g: &Graph, x: &[f64], alpha: f64) -> Vec<f64> {
    let mut b = alloc::vec![0.0; g.n()];
    for (e, &xe) in g.edges().iter().zip(x) {
        b[e.tail] += xe;
        b[e.head] += xe;
    }
    b.iter_mut().for_each(|v| *v *= 4.0 * alpha);
    b
}

/// Every occurring event, in resampling priority order.
pub fn occurring_events(g: &Graph, r: usize, x: &[f64], alpha: f64, t: &ThresholdAssignment) -> Vec<BadEvent> {
    let mask = round_thresholds(g, x, alpha, t);
    let mut out = Vec::new();
    for id in g.edge_ids() {
        if !mask[id.0] {
            let e = g.edge(id);
            let covered = g
                .length2_paths_with_edges(e.tail, e.head)
                .iter()
                .filter(|p| mask[p.first.0] && mask[p.second.0])
                .count();
            if covered <= r {
                out.push(BadEvent::Unsatisfied(id));
            }
        }
    }
    let z = charges(g, x, alpha, &t.t);
    let bounds = charge_bounds(g, x, alpha);
    for u in 0..g.n() {
        if z[u] as f64 > bounds[u] {
            out.push(BadEvent::Overloaded(u));
        }
    }
    out
}

/// Thresholds an event reads: the endpoints and common midpoints of an edge
/// event, the neighbourhood of a vertex event. Sorted.
pub fn event_variables(g: &Graph, ev: BadEvent) -> Vec<VertexId> {
    let mut set = BTreeSet::new();
    match ev {
        BadEvent::Unsatisfied(id) => {
            let e = g.edge(id);
            set.insert(e.tail);
            set.insert(e.head);
            set.extend(g.length2_paths(e.tail, e.head).iter().map(|p| p.mid));
        }
        BadEvent::Overloaded(u) => {
            set.extend(g.out_neighbors(u).iter().map(|&(v, _)| v));
            set.extend(g.in_neighbors(u).iter().map(|&(v, _)| v));
        }
    }
    set.into_iter().collect()
}

/// Resamples until no event occurs. `x` must be a feasible capacity vector
/// of the relaxation; its cost is reported as the LP value.
pub fn lll_round(g: &Graph, r: usize, x: &[f64], cfg: &RoundingConfig, seed: u64) -> Result<LllOutcome, RoundError> {
    if !g.is_unit_cost() {
        return Err(RoundError::NonUnitCost);
    }
    if g.max_degree() < 2 {
        return Err(RoundError::DegreeTooSmall);
    }
    let alpha = cfg.alpha(g);
    let limit = cfg.resample_limit(g.n());
    let mut stream = rng::derived_stream(seed, tag::LLL, 0);
    let mut t = ThresholdAssignment { t: (0..g.n()).map(|_| stream.random::<f64>()).collect(), seed };
    let mut trace = LllTrace::default();
    loop {
        let Some(&ev) = occurring_events(g, r, x, alpha, &t).first() else {
            break;
        };
        if trace.events.len() >= limit {
            return Err(RoundError::ResamplesExceeded { limit, trace: Box::new(trace) });
        }
        for v in event_variables(g, ev) {
            t.t[v] = stream.random::<f64>();
        }
        trace.events.push(ev);
    }
    let mask = round_thresholds(g, x, alpha, &t);
    let spanner = mask_to_spanner(&mask, SpannerMeta::new("lll-ft2", 2, r, seed));
    let lp_value: f64 = x.iter().zip(g.edges()).map(|(a, e)| a * e.cost).sum();
    let cost = spanner.cost(g);
    let report = RoundingReport {
        lp_value,
        alpha,
        attempts: 1,
        cost,
        ratio: ratio(cost, lp_value),
        resamples: Some(trace.resamples()),
        seed,
    };
    Ok(LllOutcome { rounded: Rounded { spanner, report }, thresholds: t, trace })
}

/// Solves the relaxation and applies [`lll_round`].
pub fn lll_ft2(g: &Graph, r: usize, cfg: &RoundingConfig, seed: u64) -> Result<LllOutcome, RoundError> {
    if r > g.n() {
        return Err(RoundError::FaultBudgetTooLarge { r, n: g.n() });
    }
    let sol = solve_lp(g, r, &cfg.lp)?;
    let mut out = lll_round(g, r, &sol.x, cfg, seed)?;
    out.rounded.report.lp_value = sol.objective_value;
    out.rounded.report.ratio = ratio(out.rounded.report.cost, sol.objective_value);
    Ok(out)
}
