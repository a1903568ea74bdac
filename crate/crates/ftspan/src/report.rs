//! JSON records written by the command-line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ftspan_core::local::{DistFt2Report, SimTrace};
use ftspan_core::lp::{FractionalSolution, LpModel};
use ftspan_core::oracle::FtVerdict;
use ftspan_core::round::RoundingReport;
use ftspan_core::spanner::max_stretch;
use ftspan_core::{Graph, Spanner};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub invocation: String,
    pub algorithm: String,
    pub n: usize,
    pub host_edges: usize,
    pub size: usize,
    pub cost: f64,
    /// Largest stretch over host edges; `null` when some edge is
    /// disconnected in the spanner.
    pub max_stretch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

impl Metrics {
    pub fn new(invocation: &str, g: &Graph, h: &Spanner) -> Self {
        let s = max_stretch(g, h);
        Metrics {
            invocation: invocation.to_string(),
            algorithm: h.meta.algorithm.clone(),
            n: g.n(),
            host_edges: g.num_edges(),
            size: h.len(),
            cost: h.cost(g),
            max_stretch: s.is_finite().then_some(s),
            lp_value: None,
            ratio: None,
            rounds: None,
            iterations: None,
            report: None,
        }
    }
}

pub fn rounding_report(r: &RoundingReport) -> Value {
    let mut v = json!({
        "lp_value": r.lp_value,
        "alpha": r.alpha,
        "attempts": r.attempts,
        "cost": r.cost,
        "ratio": finite(r.ratio),
        "seed": r.seed,
    });
    if let Some(n) = r.resamples {
        v["resamples"] = json!(n);
    }
    v
}

pub fn distributed_report(r: &DistFt2Report) -> Value {
    json!({
        "iterations": r.iterations,
        "rounds_used": r.rounds_used,
        "alpha": r.alpha,
        "lp_value": r.lp_value,
        "averaged_cost": r.averaged_cost,
        "cluster_lp_sums": r.cluster_lp_sums,
        "cost": r.cost,
        "ratio": finite(r.ratio),
        "valid": r.valid,
        "residual_violation": r.residual_violation,
        "min_padded_iterations": r.min_padded_iterations,
    })
}

fn finite(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

/// Per-edge `x` keyed `tail:head`, per-path `f` keyed `tail:mid:head`.
pub fn lp_dump(invocation: &str, g: &Graph, model: &LpModel, sol: &FractionalSolution) -> Value {
    let x: BTreeMap<String, f64> =
        g.edges().iter().zip(&sol.x).map(|(e, &v)| (format!("{}:{}", e.tail, e.head), v)).collect();
    let f: BTreeMap<String, f64> = model
        .paths()
        .iter()
        .zip(&sol.f)
        .map(|(p, &v)| (format!("{}:{}:{}", p.path.tail, p.path.mid, p.path.head), v))
        .collect();
    json!({
        "invocation": invocation,
        "objective": sol.objective_value,
        "cut_count": sol.cut_count,
        "rounds": sol.rounds,
        "x": x,
        "f": f,
    })
}

pub fn verdict(v: &FtVerdict) -> Value {
    let witness = v.witness.as_ref().map(|w| {
        json!({
            "faults": w.faults.vertices(),
            "edge": w.edge.0,
        })
    });
    json!({ "ok": v.ok, "fault_sets_checked": v.fault_sets_checked, "witness": witness })
}

/// One JSON line per round, then a summary line.
pub fn trace_lines(invocation: &str, trace: &SimTrace, extra: Value) -> String {
    let mut s = String::new();
    for r in &trace.records {
        let phase = trace.phases.get(r.phase).map(|p| p.name.as_str()).unwrap_or("");
        let line = json!({ "round": r.round, "phase": phase, "messages": r.messages, "bytes": r.bytes });
        writeln!(s, "{line}").unwrap();
    }
    let phases: Vec<Value> = trace.phases.iter().map(|p| json!({ "name": p.name, "rounds": p.rounds })).collect();
    let mut summary = json!({
        "summary": true,
        "invocation": invocation,
        "rounds_used": trace.rounds_used,
        "completed": trace.completed,
        "messages": trace.records.iter().map(|r| r.messages).sum::<usize>(),
        "phases": phases,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut summary, extra) {
        dst.extend(src);
    }
    writeln!(s, "{summary}").unwrap();
    s
}
