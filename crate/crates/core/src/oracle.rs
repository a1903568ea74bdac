//! Exhaustive ground truth: fault-set enumeration for fault-tolerant stretch,
//! the length-two path characterization for stretch 2, and the exact
//! minimum-cost fault-tolerant 2-spanner by subset enumeration.
//!
//! Nothing here samples. Inputs beyond the enumeration budget are rejected
//! with an error.

use alloc::vec::Vec;

use thiserror::Error;

use crate::dist::DistanceWorkspace;
use crate::graph::{EdgeId, FaultSet, Graph};
use crate::spanner::Spanner;

/// Default cap on the number of fault sets `verify_ft` will enumerate.
pub const DEFAULT_BUDGET: u64 = 100_000;
/// `brute_optimum_ft2` enumerates `2^|E|` subsets.
pub const BRUTE_FORCE_EDGE_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("too large to enumerate: {required} fault sets exceed the budget of {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("too large to enumerate: {edges} edges exceed the limit of {limit}")]
    TooManyEdges { edges: usize, limit: usize },
}

/// A fault set together with a host edge whose stretch it breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FtWitness {
    pub faults: FaultSet,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FtVerdict {
    pub ok: bool,
    pub witness: Option<FtWitness>,
    pub fault_sets_checked: u64,
}

/// `sum_{i <= r} C(n, i)`, saturating.
pub fn count_fault_sets(n: usize, r: usize) -> u64 {
    let mut total: u64 = 0;
    let mut c: u128 = 1;
    for i in 0..=r.min(n) {
        if i > 0 {
            c = c * (n - i + 1) as u128 / i as u128;
        }
        total = total.saturating_add(c.min(u64::MAX as u128) as u64);
    }
    total
}

/// All vertex subsets of size at most `r`, by size and then
/// lexicographically.
pub struct FaultSets {
    n: usize,
    r: usize,
    current: Vec<usize>,
    started: bool,
}

pub fn fault_sets(n: usize, r: usize) -> FaultSets {
    FaultSets { n, r: r.min(n), current: Vec::new(), started: false }
}

impl Iterator for FaultSets {
    type Item = FaultSet;

    fn next(&mut self) -> Option<FaultSet> {
        if !self.started {
            self.started = true;
            return Some(FaultSet::empty());
        }
        let k = self.current.len();
        // advance to the next combination of the same size
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.current[i] < self.n - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return Some(FaultSet::new(self.current.iter().copied()));
            }
        }
        if k >= self.r {
            return None;
        }
        self.current = (0..k + 1).collect();
        Some(FaultSet::new(self.current.iter().copied()))
    }
}

/// First host edge (by id) that violates stretch `k` under faults `f`, given
/// the spanner's membership mask.
pub fn check_fault_set(
    g: &Graph,
    mask: &[bool],
    k: f64,
    f: &FaultSet,
    ws: &mut DistanceWorkspace,
) -> Option<EdgeId> {
    let mut failed = alloc::vec![false; g.n()];
    for &v in f.vertices() {
        failed[v] = true;
    }
    let alive = |id: EdgeId| {
        let e = g.edge(id);
        !failed[e.tail] && !failed[e.head]
    };
    for id in g.edge_ids() {
        if mask[id.0] || !alive(id) {
            continue;
        }
        let e = g.edge(id);
        let d_host = ws.distance(g, e.tail, e.head, e.length, alive);
        let bound = k * d_host;
        let d_sub = ws.distance(g, e.tail, e.head, bound, |x| mask[x.0] && alive(x));
        if d_sub > bound {
            return Some(id);
        }
    }
    None
}

/// Exhaustive check of the fault-tolerant stretch condition: for every
/// `|F| <= r` and every host edge `(u, v)` with `u, v` outside `F`,
/// `d_{h \ F}(u, v) <= k * d_{g \ F}(u, v)`.
pub fn verify_ft(g: &Graph, h: &Spanner, k: f64, r: usize, budget: u64) -> Result<FtVerdict, OracleError> {
    let required = count_fault_sets(g.n(), r);
    if required > budget {
        return Err(OracleError::BudgetExceeded { required, budget });
    }
    let mask = h.mask(g.num_edges());
    let mut ws = DistanceWorkspace::new(g.n());
    let mut checked = 0;
    for f in fault_sets(g.n(), r) {
        checked += 1;
        if let Some(edge) = check_fault_set(g, &mask, k, &f, &mut ws) {
            return Ok(FtVerdict {
                ok: false,
                witness: Some(FtWitness { faults: f, edge }),
                fault_sets_checked: checked,
            });
        }
    }
    Ok(FtVerdict { ok: true, witness: None, fault_sets_checked: checked })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharVerdict {
    pub ok: bool,
    /// Lowest-id host edge that is neither kept nor covered by `r + 1`
    /// length-two paths.
    pub witness: Option<EdgeId>,
}

/// Stretch-2 characterization for unit lengths: every host edge is in `h` or
/// has at least `r + 1` length-two paths inside `h`.
pub fn verify_ft2_char(g: &Graph, h: &Spanner, r: usize) -> CharVerdict {
    let mask = h.mask(g.num_edges());
    verify_ft2_char_mask(g, &mask, r)
}

pub fn verify_ft2_char_mask(g: &Graph, mask: &[bool], r: usize) -> CharVerdict {
    for id in g.edge_ids() {
        if mask[id.0] {
            continue;
        }
        let e = g.edge(id);
        let covered = g
            .length2_paths_with_edges(e.tail, e.head)
            .iter()
            .filter(|p| mask[p.first.0] && mask[p.second.0])
            .count();
        if covered < r + 1 {
            return CharVerdict { ok: false, witness: Some(id) };
        }
    }
    CharVerdict { ok: true, witness: None }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteOptimum {
    pub cost: f64,
    /// Lexicographically least optimal edge set, sorted.
    pub edges: Vec<EdgeId>,
}

/// Exact minimum-cost edge set passing [`verify_ft2_char`], by enumerating
/// all `2^|E|` subsets.
pub fn brute_optimum_ft2(g: &Graph, r: usize) -> Result<BruteOptimum, OracleError> {
    let m = g.num_edges();
    if m > BRUTE_FORCE_EDGE_LIMIT {
        return Err(OracleError::TooManyEdges { edges: m, limit: BRUTE_FORCE_EDGE_LIMIT });
    }
    let paths: Vec<Vec<u32>> = g
        .edge_ids()
        .map(|id| {
            let e = g.edge(id);
            g.length2_paths_with_edges(e.tail, e.head)
                .iter()
                .map(|p| (1u32 << p.first.0) | (1u32 << p.second.0))
                .collect()
        })
        .collect();
    let costs: Vec<f64> = g.edges().iter().map(|e| e.cost).collect();
    let valid = |set: u32| {
        (0..m).all(|i| {
            set >> i & 1 == 1 || paths[i].iter().filter(|&&pm| set & pm == pm).count() > r
        })
    };
    let ids = |set: u32| -> Vec<EdgeId> { (0..m).filter(|i| set >> i & 1 == 1).map(EdgeId).collect() };
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut best_cost = costs.iter().sum::<f64>();
    let mut best = full;
    for set in 0..=full {
        let mut cost = 0.0;
        let mut bits = set;
        while bits != 0 {
            cost += costs[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        if cost > best_cost + 1e-9 || !valid(set) {
            continue;
        }
        if cost < best_cost - 1e-9 || ids(set) < ids(best) {
            best_cost = cost;
            best = set;
        }
    }
    Ok(BruteOptimum { cost: best_cost, edges: ids(best) })
}
