//! Dense two-phase primal simplex with bounded variables.
//!
//! Pricing is Dantzig's rule with ties broken by lowest column index; after a
//! run of degenerate pivots the solver switches to Bland's rule until the
//! objective moves again. Every choice is index-ordered, so identical inputs
//! give identical pivot sequences.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min c.x` subject to linear rows and `lower <= x <= upper`. Lower bounds
/// must be finite; upper bounds may be `+inf`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => libm::fabs(lhs - c.rhs),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Basic column per row of the internal tableau, for determinism checks.
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed model: {0}")]
    Malformed(&'static str),
    #[error(
        "numerical stall after {iterations} pivots: residual {residual:e}, smallest pivot {min_pivot:e}"
    )]
    NumericalStall { iterations: usize, residual: f64, min_pivot: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Feasibility and optimality tolerance.
    pub tolerance: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tolerance: f64,
    /// 0 picks a limit from the model size.
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { tolerance: 1e-7, pivot_tolerance: 1e-9, max_iterations: 0, bland_after: 30 }
    }
}

struct Tableau {
    m: usize,
    /// structural + slack + artificial columns; the rhs sits at column `cols`
    cols: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    beta: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
    min_pivot: f64,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn recompute_beta(&mut self) {
        for i in 0..self.m {
            let mut v = self.at(i, self.cols);
            for j in 0..self.cols {
                if !self.is_basic[j] && self.at_upper[j] {
                    v -= self.at(i, j) * self.upper[j];
                }
            }
            self.beta[i] = v;
        }
    }

    fn recompute_reduced(&mut self) {
        for j in 0..self.cols {
            let mut d = self.cost[j];
            for i in 0..self.m {
                let a = self.at(i, j);
                if a != 0.0 {
                    d -= self.cost[self.basis[i]] * a;
                }
            }
            self.reduced[j] = if self.is_basic[j] { 0.0 } else { d };
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.at(r, j);
        self.min_pivot = self.min_pivot.min(libm::fabs(p));
        let row_r = r * w;
        for k in 0..w {
            self.data[row_r + k] /= p;
        }
        let nz: Vec<usize> = (0..w).filter(|&k| self.data[row_r + k] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let a = self.data[i * w + j];
            if a == 0.0 {
                continue;
            }
            let row_i = i * w;
            for &k in &nz {
                let v = self.data[row_i + k] - a * self.data[row_r + k];
                self.data[row_i + k] = if libm::fabs(v) < 1e-14 { 0.0 } else { v };
            }
            self.data[row_i + j] = 0.0;
        }
        let dj = self.reduced[j];
        if dj != 0.0 {
            for &k in &nz {
                if k < self.cols {
                    self.reduced[k] -= dj * self.data[row_r + k];
                }
            }
            self.reduced[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.at_upper[j] = false;
        self.basis[r] = j;
    }

    fn step(&mut self, opts: &LpOptions, bland: bool) -> (Step, f64) {
        let tol = opts.tolerance;
        let mut enter: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if self.is_basic[j] || self.upper[j] <= 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let gain = if self.at_upper[j] { d } else { -d };
            if gain > tol {
                match enter {
                    None => enter = Some((j, gain)),
                    Some((_, g)) if !bland && gain > g => enter = Some((j, gain)),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
        }
        let Some((j, _)) = enter else {
            return (Step::Optimal, 0.0);
        };
        let sigma = if self.at_upper[j] { -1.0 } else { 1.0 };

        let mut theta = self.upper[j];
        let mut leave: Option<(usize, bool, f64)> = None;
        for i in 0..self.m {
            let a = sigma * self.at(i, j);
            let (t, to_upper) = if a > opts.pivot_tolerance {
                ((self.beta[i] / a).max(0.0), false)
            } else if a < -opts.pivot_tolerance && self.upper[self.basis[i]].is_finite() {
                (((self.upper[self.basis[i]] - self.beta[i]) / -a).max(0.0), true)
            } else {
                continue;
            };
            let better = match leave {
                None => t < theta || (t == theta && !theta.is_finite()),
                Some((li, _, la)) => {
                    if t < theta - 1e-12 {
                        true
                    } else if t <= theta + 1e-12 {
                        if bland {
                            self.basis[i] < self.basis[li]
                        } else {
                            libm::fabs(a) > la || (libm::fabs(a) == la && self.basis[i] < self.basis[li])
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = if leave.is_none() || t < theta { t } else { theta };
                leave = Some((i, to_upper, libm::fabs(a)));
            }
        }
        if leave.is_none() && !theta.is_finite() {
            return (Step::Unbounded, 0.0);
        }
        self.iterations += 1;
        for i in 0..self.m {
            let a = self.at(i, j);
            if a != 0.0 {
                self.beta[i] -= sigma * theta * a;
            }
        }
        match leave {
            None => {
                // bound flip
                self.at_upper[j] = !self.at_upper[j];
            }
            Some((r, to_upper, _)) => {
                let entering_value = if self.at_upper[j] { self.upper[j] - theta } else { theta };
                let leaving = self.basis[r];
                self.pivot(r, j);
                self.at_upper[leaving] = to_upper;
                self.beta[r] = entering_value;
            }
        }
        (Step::Moved, theta)
    }

    fn run(&mut self, opts: &LpOptions, limit: usize) -> Result<LpStatus, LpError> {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= limit {
                return Ok(LpStatus::IterationLimit);
            }
            let bland = degenerate >= opts.bland_after;
            match self.step(opts, bland) {
                (Step::Optimal, _) => return Ok(LpStatus::Optimal),
                (Step::Unbounded, _) => return Ok(LpStatus::Unbounded),
                (Step::Moved, theta) => {
                    if theta <= 1e-12 {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                }
            }
            if self.iterations % 256 == 0 {
                self.recompute_beta();
                if self.beta.iter().any(|b| !b.is_finite()) {
                    return Err(LpError::NumericalStall {
                        iterations: self.iterations,
                        residual: f64::INFINITY,
                        min_pivot: self.min_pivot,
                    });
                }
            }
        }
    }

    fn column_value(&self, j: usize) -> f64 {
        if self.is_basic[j] {
            let r = self.basis.iter().position(|&b| b == j).expect("basic column has a row");
            self.beta[r]
        } else {
            self.nonbasic_value(j)
        }
    }
}

/// Solves `lp`. Infeasibility, unboundedness and the iteration cap are
/// reported through [`LpStatus`]; only malformed input and numerical trouble
/// are errors.
pub fn solve(lp: &LinearProgram, opts: &LpOptions) -> Result<LpResult, LpError> {
    let n = lp.num_vars();
    if lp.lower.len() != n || lp.upper.len() != n {
        return Err(LpError::Malformed("bound vectors do not match the objective"));
    }
    if lp.lower.iter().any(|l| !l.is_finite()) {
        return Err(LpError::Malformed("lower bounds must be finite"));
    }
    let infeasible = |n: usize| LpResult {
        status: LpStatus::Infeasible,
        x: alloc::vec![0.0; n],
        objective: f64::NAN,
        iterations: 0,
        basis: Vec::new(),
    };
    if (0..n).any(|j| lp.upper[j] < lp.lower[j]) {
        return Ok(infeasible(n));
    }
    let m = lp.constraints.len();

    // normalized rows: shifted by the lower bounds, nonnegative rhs
    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        if c.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) || !c.rhs.is_finite() {
            return Err(LpError::Malformed("constraint references an unknown column or is not finite"));
        }
        let shift: f64 = c.coeffs.iter().map(|&(j, a)| a * lp.lower[j]).sum();
        let mut rhs = c.rhs - shift;
        let mut coeffs = c.coeffs.clone();
        let mut rel = c.relation;
        if rhs < 0.0 {
            rhs = -rhs;
            coeffs.iter_mut().for_each(|(_, a)| *a = -*a);
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push((coeffs, rel, rhs));
    }
    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + slacks + artificials;
    let width = cols + 1;
    let mut t = Tableau {
        m,
        cols,
        width,
        data: alloc::vec![0.0; m * width],
        basis: alloc::vec![0; m],
        beta: alloc::vec![0.0; m],
        upper: alloc::vec![f64::INFINITY; cols],
        at_upper: alloc::vec![false; cols],
        is_basic: alloc::vec![false; cols],
        cost: alloc::vec![0.0; cols],
        reduced: alloc::vec![0.0; cols],
        iterations: 0,
        min_pivot: f64::INFINITY,
    };
    for j in 0..n {
        t.upper[j] = lp.upper[j] - lp.lower[j];
    }
    let first_art = n + slacks;
    let (mut next_slack, mut next_art) = (n, first_art);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let row = i * width;
        for &(j, a) in coeffs {
            t.data[row + j] += a;
        }
        t.data[row + cols] = *rhs;
        match rel {
            Relation::Le => {
                t.data[row + next_slack] = 1.0;
                t.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.data[row + next_slack] = -1.0;
                next_slack += 1;
                t.data[row + next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.data[row + next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
        }
        t.beta[i] = *rhs;
    }
    for &b in &t.basis {
        t.is_basic[b] = true;
    }
    let limit = if opts.max_iterations > 0 { opts.max_iterations } else { 50 * (m + cols) + 1000 };

    // phase 1
    if artificials > 0 {
        for j in first_art..cols {
            t.cost[j] = 1.0;
        }
        t.recompute_reduced();
        let status = t.run(opts, limit)?;
        if status == LpStatus::IterationLimit {
            return Ok(finish(&t, lp, n, LpStatus::IterationLimit));
        }
        t.recompute_beta();
        let infeas: f64 = (first_art..cols).map(|j| t.column_value(j)).sum();
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if infeas > opts.tolerance * scale {
            let mut out = infeasible(n);
            out.iterations = t.iterations;
            return Ok(out);
        }
        // drive zero-valued artificials out of the basis
        for r in 0..m {
            if t.basis[r] < first_art {
                continue;
            }
            let candidate = (0..first_art)
                .filter(|&j| !t.is_basic[j])
                .find(|&j| libm::fabs(t.at(r, j)) > opts.pivot_tolerance * 1e3);
            if let Some(j) = candidate {
                let value = t.nonbasic_value(j);
                let leaving = t.basis[r];
                t.pivot(r, j);
                t.at_upper[leaving] = false;
                t.beta[r] = value;
            }
        }
        for j in first_art..cols {
            t.upper[j] = 0.0;
            t.cost[j] = 0.0;
        }
        t.recompute_beta();
    }

    // phase 2
    for j in 0..n {
        t.cost[j] = lp.objective[j];
    }
    t.recompute_reduced();
    let status = t.run(opts, limit)?;
    t.recompute_beta();
    let out = finish(&t, lp, n, status);
    if status == LpStatus::Optimal {
        let residual = lp.max_violation(&out.x);
        let scale = 1.0 + lp.constraints.iter().map(|c| libm::fabs(c.rhs)).fold(0.0, f64::max);
        if residual > 1e3 * opts.tolerance * scale {
            return Err(LpError::NumericalStall { iterations: t.iterations, residual, min_pivot: t.min_pivot });
        }
    }
    Ok(out)
}

fn finish(t: &Tableau, lp: &LinearProgram, n: usize, status: LpStatus) -> LpResult {
    let mut x = alloc::vec![0.0; n];
    for (j, xj) in x.iter_mut().enumerate() {
        let v = t.column_value(j).clamp(0.0, t.upper[j]);
        *xj = v + lp.lower[j];
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
    LpResult { status, x, objective, iterations: t.iterations, basis: t.basis.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> LpOptions {
        LpOptions::default()
    }

    #[test]
    fn single_bound_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 0.5);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 1.0);
        let r = solve(&lp, &opts()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 2.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp, &opts()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(0.0, 0.0, 1.0);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Ge, 0.0);
        assert_eq!(solve(&lp, &opts()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounded_variables_and_equalities() {
        // max x + 2y  s.t. x + y = 1.5, 0 <= x <= 1, 0 <= y <= 1
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, 1.0);
        let y = lp.add_var(-2.0, 0.0, 1.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.5);
        let r = solve(&lp, &opts()).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 0.5).abs() < 1e-9 && (r.x[1] - 1.0).abs() < 1e-9);
        assert!((r.objective + 2.5).abs() < 1e-9);
    }

    #[test]
    fn nonzero_lower_bounds() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 1.0, 1.0);
        let y = lp.add_var(1.0, 0.25, 4.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Ge, 0.5);
        let r = solve(&lp, &opts()).unwrap();
        assert!((r.objective - 1.25).abs() < 1e-9);
    }

    #[test]
    fn degenerate_ties_are_deterministic() {
        // highly degenerate: many identical covering rows through the origin
        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..6).map(|_| lp.add_var(1.0, 0.0, 1.0)).collect();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    lp.add_constraint(vec![(vars[i], 1.0), (vars[j], 1.0)], Relation::Ge, 1.0);
                    lp.add_constraint(vec![(vars[i], 1.0), (vars[j], -1.0)], Relation::Le, 0.0);
                }
            }
        }
        let a = solve(&lp, &opts()).unwrap();
        let b = solve(&lp, &opts()).unwrap();
        assert_eq!(a, b);
        assert!((a.objective - 3.0).abs() < 1e-9);
    }

    /// Independent oracle: enumerate all vertices of the feasible region as
    /// intersections of `n` tight rows or bounds and take the best one.
    fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in &lp.constraints {
            let mut a = vec![0.0; n];
            for &(j, v) in &c.coeffs {
                a[j] += v;
            }
            planes.push((a, c.rhs));
        }
        for j in 0..n {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push((a.clone(), lp.lower[j]));
            if lp.upper[j].is_finite() {
                planes.push((a, lp.upper[j]));
            }
        }
        let mut best: Option<f64> = None;
        let k = planes.len();
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            // solve the n x n system by Gaussian elimination
            let mut m: Vec<Vec<f64>> = idx.iter().map(|&i| {
                let mut row = planes[i].0.clone();
                row.push(planes[i].1);
                row
            }).collect();
            let mut singular = false;
            for col in 0..n {
                let p = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
                if m[p][col].abs() < 1e-9 { singular = true; break; }
                m.swap(col, p);
                for r in 0..n {
                    if r != col {
                        let f = m[r][col] / m[col][col];
                        for c in col..=n { m[r][c] -= f * m[col][c]; }
                    }
                }
            }
            if !singular {
                let x: Vec<f64> = (0..n).map(|i| m[i][n] / m[i][i]).collect();
                if lp.max_violation(&x) <= 1e-7 {
                    let obj: f64 = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 { return best; }
                i -= 1;
                if idx[i] < k - n + i { break; }
            }
            idx[i] += 1;
            for j in i + 1..n { idx[j] = idx[j - 1] + 1; }
        }
    }

    fn arb_lp() -> impl Strategy<Value = LinearProgram> {
        (1usize..4, 1usize..5).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(-3i32..4, n),
                proptest::collection::vec(1i32..4, n),
                proptest::collection::vec((proptest::collection::vec(-3i32..4, n), 0u8..3, -4i32..6), m),
            )
                .prop_map(move |(c, ub, rows)| {
                    let mut lp = LinearProgram::new();
                    for j in 0..n {
                        lp.add_var(c[j] as f64, 0.0, ub[j] as f64);
                    }
                    for (a, rel, b) in rows {
                        let coeffs = a.iter().enumerate().map(|(j, &v)| (j, v as f64)).collect();
                        let rel = [Relation::Le, Relation::Ge, Relation::Eq][rel as usize];
                        lp.add_constraint(coeffs, rel, b as f64);
                    }
                    lp
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn agrees_with_vertex_enumeration(lp in arb_lp()) {
            let r = solve(&lp, &opts()).unwrap();
            match vertex_enumeration(&lp) {
                None => prop_assert_eq!(r.status, LpStatus::Infeasible),
                Some(best) => {
                    prop_assert_eq!(r.status, LpStatus::Optimal);
                    prop_assert!((r.objective - best).abs() < 1e-6, "{} vs {}", r.objective, best);
                    prop_assert!(lp.max_violation(&r.x) < 1e-7);
                }
            }
        }
    }
}
