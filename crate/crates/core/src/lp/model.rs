//! The knapsack-cover relaxation of minimum-cost r-fault-tolerant 2-spanner.
//!
//! Variables are `x_e` per edge (column `e`) followed by `f_P` per
//! length-two path of every demand edge, grouped by demand id and ordered by
//! midpoint inside a group.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use thiserror::Error;

use super::simplex::{Constraint, LinearProgram, Relation};
use crate::graph::{EdgeId, Graph, Path2};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpModelError {
    #[error("the 2-spanner relaxation needs a directed graph")]
    UndirectedInput,
    #[error("the 2-spanner relaxation needs unit edge lengths")]
    NonUnitLength,
    #[error("expected {expected} edge costs, got {got}")]
    CostCount { expected: usize, got: usize },
}

/// One `f_P` column: the path and the edges it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathVar {
    pub demand: EdgeId,
    pub path: Path2,
    pub first: EdgeId,
    pub second: EdgeId,
}

/// `(r + 1 - |w|) x_demand + sum over paths not in w of f_P >= r + 1 - |w|`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnapsackCoverCut {
    pub demand: EdgeId,
    /// Sorted by midpoint.
    pub w: Vec<Path2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    r: usize,
    costs: Vec<f64>,
    paths: Vec<PathVar>,
    groups: Vec<(usize, usize)>,
    fixed: Vec<bool>,
    cuts: BTreeSet<KnapsackCoverCut>,
}

/// The base model for `g`: capacity rows, bounds, and the `W = {}` row of
/// every demand, with presolve fixings applied.
pub fn build_base_lp(g: &Graph, r: usize) -> Result<LpModel, LpModelError> {
    let costs: Vec<f64> = g.edges().iter().map(|e| e.cost).collect();
    LpModel::with_costs(g, r, &costs)
}

impl LpModel {
    /// Like [`build_base_lp`] but with the objective taken from `costs`.
    pub fn with_costs(g: &Graph, r: usize, costs: &[f64]) -> Result<Self, LpModelError> {
        if !g.directed() {
            return Err(LpModelError::UndirectedInput);
        }
        if !g.is_unit_length() {
            return Err(LpModelError::NonUnitLength);
        }
        if costs.len() != g.num_edges() {
            return Err(LpModelError::CostCount { expected: g.num_edges(), got: costs.len() });
        }
        let mut paths = Vec::new();
        let mut groups = Vec::with_capacity(g.num_edges());
        for id in g.edge_ids() {
            let e = g.edge(id);
            let start = paths.len();
            for p in g.length2_paths_with_edges(e.tail, e.head) {
                paths.push(PathVar { demand: id, path: p.path, first: p.first, second: p.second });
            }
            groups.push((start, paths.len()));
        }
        let mut model = LpModel {
            r,
            costs: costs.to_vec(),
            paths,
            groups,
            fixed: alloc::vec![false; g.num_edges()],
            cuts: BTreeSet::new(),
        };
        model.set_presolve(true);
        Ok(model)
    }

    /// Fixes `x = 1` on demands with at most `r` paths (implied by the cut
    /// with `W` = all paths). Turning it off leaves those demands to the rows.
    pub fn set_presolve(&mut self, on: bool) {
        for (e, &(s, t)) in self.groups.iter().enumerate() {
            self.fixed[e] = on && t - s <= self.r;
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn num_edges(&self) -> usize {
        self.costs.len()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_edges() + self.num_paths()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn paths(&self) -> &[PathVar] {
        &self.paths
    }

    /// Indices into [`paths`](Self::paths) for the demand `e`.
    pub fn demand_range(&self, e: EdgeId) -> core::ops::Range<usize> {
        let (s, t) = self.groups[e.0];
        s..t
    }

    pub fn demand_paths(&self, e: EdgeId) -> &[PathVar] {
        &self.paths[self.demand_range(e)]
    }

    pub fn is_fixed(&self, e: EdgeId) -> bool {
        self.fixed[e.0]
    }

    pub fn cuts(&self) -> &BTreeSet<KnapsackCoverCut> {
        &self.cuts
    }

    /// Adds a lazy cut; the empty `W` row is always present and is not stored.
    /// Returns whether the cut is new.
    pub fn add_cut(&mut self, cut: KnapsackCoverCut) -> bool {
        if cut.w.is_empty() {
            return false;
        }
        self.cuts.insert(cut)
    }

    fn cut_row(&self, demand: EdgeId, w: &[Path2]) -> Constraint {
        let rhs = (self.r + 1 - w.len()) as f64;
        let mut coeffs = alloc::vec![(demand.0, rhs)];
        let m = self.num_edges();
        for i in self.demand_range(demand) {
            if w.binary_search_by(|p| p.mid.cmp(&self.paths[i].path.mid)).is_err() {
                coeffs.push((m + i, 1.0));
            }
        }
        Constraint { coeffs, relation: Relation::Ge, rhs }
    }

    /// All materialized rows as a linear program over `x` then `f`.
    pub fn to_linear_program(&self) -> LinearProgram {
        let m = self.num_edges();
        let mut lp = LinearProgram::new();
        for e in 0..m {
            let lower = if self.fixed[e] { 1.0 } else { 0.0 };
            lp.add_var(self.costs[e], lower, 1.0);
        }
        for _ in &self.paths {
            lp.add_var(0.0, 0.0, f64::INFINITY);
        }
        for (i, p) in self.paths.iter().enumerate() {
            lp.add_constraint(alloc::vec![(m + i, 1.0), (p.first.0, -1.0)], Relation::Le, 0.0);
            lp.add_constraint(alloc::vec![(m + i, 1.0), (p.second.0, -1.0)], Relation::Le, 0.0);
        }
        for e in 0..m {
            lp.constraints.push(self.cut_row(EdgeId(e), &[]));
        }
        for cut in &self.cuts {
            lp.constraints.push(self.cut_row(cut.demand, &cut.w));
        }
        lp
    }

    /// Capacity rows in aggregated form, one per (demand, edge) pair with at
    /// least one path of the demand using the edge.
    pub fn aggregated_capacity_rows(&self) -> Vec<Constraint> {
        let m = self.num_edges();
        let mut out = Vec::new();
        for d in 0..m {
            let range = self.demand_range(EdgeId(d));
            let mut used: BTreeSet<usize> = BTreeSet::new();
            for p in &self.paths[range.clone()] {
                used.insert(p.first.0);
                used.insert(p.second.0);
            }
            for e in used {
                let mut coeffs: Vec<(usize, f64)> = range
                    .clone()
                    .filter(|&i| self.paths[i].first.0 == e || self.paths[i].second.0 == e)
                    .map(|i| (m + i, 1.0))
                    .collect();
                coeffs.push((e, -1.0));
                out.push(Constraint { coeffs, relation: Relation::Le, rhs: 0.0 });
            }
        }
        out
    }

    /// Splits a flat LP column vector into `x` and `f`.
    pub fn split<'a>(&self, values: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        values.split_at(self.num_edges())
    }
}

/// A fractional point of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    /// Indexed by edge id.
    pub x: Vec<f64>,
    /// Parallel to `paths`.
    pub f: Vec<f64>,
    pub paths: Vec<Path2>,
    pub objective_value: f64,
    /// Materialized cuts with `|W| >= 1` at the end of the solve.
    pub cut_count: usize,
    /// LP solves performed.
    pub rounds: usize,
    /// Objective after each solve.
    pub history: Vec<f64>,
}

impl FractionalSolution {
    pub fn flow(&self, path: Path2) -> Option<f64> {
        self.paths.iter().position(|p| *p == path).map(|i| self.f[i])
    }
}

/// A cut together with how far `sol` violates it.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolatedCut {
    pub cut: KnapsackCoverCut,
    pub violation: f64,
}

/// For every demand and every `kappa` in `0..=min(r, |P|)`, tests the cut
/// whose `W` holds the `kappa` paths with the largest flow (ties by smaller
/// midpoint). Returns the cuts violated by more than `eps`, in demand order.
pub fn separation_oracle(model: &LpModel, x: &[f64], f: &[f64], eps: f64) -> Vec<ViolatedCut> {
    let r = model.r();
    let mut out = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    for d in 0..model.num_edges() {
        let range = model.demand_range(EdgeId(d));
        order.clear();
        order.extend(range.clone());
        order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(model.paths[a].path.mid.cmp(&model.paths[b].path.mid)));
        let total: f64 = range.clone().map(|i| f[i]).sum();
        let mut removed = 0.0;
        for kappa in 0..=r.min(order.len()) {
            if kappa > 0 {
                removed += f[order[kappa - 1]];
            }
            let need = (r + 1 - kappa) as f64;
            let lhs = need * x[d] + (total - removed);
            let violation = need - lhs;
            if violation > eps {
                let mut w: Vec<Path2> = order[..kappa].iter().map(|&i| model.paths[i].path).collect();
                w.sort_by_key(|p| p.mid);
                out.push(ViolatedCut { cut: KnapsackCoverCut { demand: EdgeId(d), w }, violation });
            }
        }
    }
    out
}

/// Largest violation of a capacity row or a bound.
pub fn capacity_violation(model: &LpModel, x: &[f64], f: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (e, &xe) in x.iter().enumerate() {
        let lower = if model.is_fixed(EdgeId(e)) { 1.0 } else { 0.0 };
        worst = worst.max(lower - xe).max(xe - 1.0);
    }
    for (i, p) in model.paths().iter().enumerate() {
        worst = worst.max(-f[i]).max(f[i] - x[p.first.0]).max(f[i] - x[p.second.0]);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::Edge;
    use crate::lp::simplex::{solve, LpOptions, LpStatus};
    use crate::oracle::verify_ft2_char_mask;
    use proptest::prelude::*;

    #[test]
    fn rejects_undirected_and_non_unit() {
        assert_eq!(build_base_lp(&generators::complete(3, false), 0), Err(LpModelError::UndirectedInput));
        let g = Graph::new(2, true, [Edge::new(0, 1, 2.0, 1.0)]).unwrap();
        assert_eq!(build_base_lp(&g, 0), Err(LpModelError::NonUnitLength));
    }

    #[test]
    fn variable_count() {
        let g = generators::complete(5, true);
        let model = build_base_lp(&g, 1).unwrap();
        assert_eq!(model.num_vars(), 20 + 20 * 3);
        assert_eq!(model.to_linear_program().num_vars(), model.num_vars());
    }

    #[test]
    fn single_edge_forces_x() {
        let g = Graph::new(2, true, [Edge::new(0, 1, 1.0, 2.5)]).unwrap();
        let mut model = build_base_lp(&g, 0).unwrap();
        model.set_presolve(false);
        let res = solve(&model.to_linear_program(), &LpOptions::default()).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert!((res.objective - 2.5).abs() < 1e-9);
    }

    #[test]
    fn oracle_finds_the_flow_cut() {
        // demand with x = 0 and r paths at full flow needs one more unit
        let r = 3;
        let g = generators::gap_fixture(10.0, r);
        let model = build_base_lp(&g, r).unwrap();
        let mut x = alloc::vec![1.0; g.num_edges()];
        x[0] = 0.0;
        let f = alloc::vec![1.0; model.num_paths()];
        let cuts = separation_oracle(&model, &x, &f, 1e-7);
        // every prefix of the r paths leaves the same unit shortfall
        assert_eq!(cuts.len(), r + 1);
        assert!(cuts.iter().all(|c| c.cut.demand == EdgeId(0) && (c.violation - 1.0).abs() < 1e-12));
        assert_eq!(cuts[r].cut.w.len(), r);
        assert!(separation_oracle(&model, &alloc::vec![1.0; g.num_edges()], &f, 1e-7).is_empty());
    }

    #[test]
    fn top_paths_break_ties_by_midpoint() {
        let g = generators::complete(5, true);
        let model = build_base_lp(&g, 2).unwrap();
        let x = alloc::vec![0.0; g.num_edges()];
        let f = alloc::vec![0.5; model.num_paths()];
        let cuts = separation_oracle(&model, &x, &f, 1e-9);
        let first: Vec<_> = cuts.iter().filter(|c| c.cut.demand == EdgeId(0)).collect();
        assert_eq!(first.len(), 3);
        assert_eq!(first[1].cut.w.iter().map(|p| p.mid).collect::<Vec<_>>(), [2]);
        assert_eq!(first[2].cut.w.iter().map(|p| p.mid).collect::<Vec<_>>(), [2, 3]);
    }

    #[test]
    fn aggregated_rows_match_per_path_rows() {
        // the aggregated form reduces to exactly the two rows per path
        for g in [generators::complete(5, true), generators::gnp(8, 0.5, true, 4), generators::gap_fixture(7.0, 3)] {
            let model = build_base_lp(&g, 1).unwrap();
            let lp = model.to_linear_program();
            let simplified: BTreeSet<Vec<(usize, i64)>> = lp.constraints[..2 * model.num_paths()]
                .iter()
                .map(|c| c.coeffs.iter().map(|&(j, a)| (j, a as i64)).collect::<BTreeSet<_>>().into_iter().collect())
                .collect();
            let aggregated: BTreeSet<Vec<(usize, i64)>> = model
                .aggregated_capacity_rows()
                .iter()
                .map(|c| c.coeffs.iter().map(|&(j, a)| (j, a as i64)).collect::<BTreeSet<_>>().into_iter().collect())
                .collect();
            assert_eq!(simplified, aggregated);
            assert_eq!(simplified.len(), 2 * model.num_paths());
        }
    }

    #[test]
    fn integral_all_ones_has_no_violation() {
        let g = generators::gnp(7, 0.6, true, 1);
        let model = build_base_lp(&g, 2).unwrap();
        let x = alloc::vec![1.0; g.num_edges()];
        let f = alloc::vec![1.0; model.num_paths()];
        assert!(separation_oracle(&model, &x, &f, 0.0).is_empty());
        assert_eq!(capacity_violation(&model, &x, &f), 0.0);
    }

    proptest! {
        /// Any edge set passing the characterization, with unit flow on every
        /// path inside it, satisfies every knapsack-cover row; and an edge
        /// set failing it leaves some cut violated.
        #[test]
        fn integral_points_match_characterization(n in 3usize..7, prob in 0.3f64..0.9, seed in any::<u64>(),
                                                  r in 0usize..3, bits in any::<u64>()) {
            let g = generators::gnp(n, prob, true, seed);
            let mut model = build_base_lp(&g, r).unwrap();
            model.set_presolve(false);
            let mask: Vec<bool> = (0..g.num_edges()).map(|i| bits >> (i % 64) & 1 == 1).collect();
            let x: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let f: Vec<f64> = model.paths().iter().map(|p| if mask[p.first.0] && mask[p.second.0] { 1.0 } else { 0.0 }).collect();
            let valid = verify_ft2_char_mask(&g, &mask, r).ok;
            prop_assert_eq!(separation_oracle(&model, &x, &f, 1e-9).is_empty(), valid);
        }
    }
}
