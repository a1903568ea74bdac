//! Cutting-plane solve of the relaxation.

use alloc::boxed::Box;
use alloc::vec::Vec;

use thiserror::Error;

use super::model::{build_base_lp, capacity_violation, separation_oracle, FractionalSolution, LpModel, LpModelError};
use super::simplex::{solve, LpError, LpOptions, LpStatus};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub eps: f64,
    pub max_cut_rounds: usize,
    /// `false` keeps only the `W = {}` rows and skips presolve, which gives
    /// the weak relaxation.
    pub kc_cuts: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { eps: 1e-7, max_cut_rounds: 200, kc_cuts: true }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] LpModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP solver stopped with status {0:?}")]
    Status(LpStatus),
    #[error("cut rounds exhausted with violation {violation:e} remaining")]
    CutRoundsExhausted { solution: Box<FractionalSolution>, violation: f64 },
}

pub fn solve_lp(g: &Graph, r: usize, opts: &SolveOptions) -> Result<FractionalSolution, SolveError> {
    let mut model = build_base_lp(g, r)?;
    solve_model(&mut model, opts)
}

/// Runs the cutting-plane loop on `model`, which keeps every cut added.
pub fn solve_model(model: &mut LpModel, opts: &SolveOptions) -> Result<FractionalSolution, SolveError> {
    if !opts.kc_cuts {
        model.set_presolve(false);
    }
    let lp_opts = LpOptions { tolerance: opts.eps, ..LpOptions::default() };
    let mut history = Vec::new();
    let mut rounds = 0;
    loop {
        let res = solve(&model.to_linear_program(), &lp_opts)?;
        if res.status != LpStatus::Optimal {
            return Err(SolveError::Status(res.status));
        }
        rounds += 1;
        let (x, f) = model.split(&res.x);
        let (x, f) = (x.to_vec(), f.to_vec());
        let objective_value = x.iter().zip(model.costs()).map(|(a, c)| a * c).sum();
        history.push(objective_value);
        let sol = FractionalSolution {
            x,
            f,
            paths: model.paths().iter().map(|p| p.path).collect(),
            objective_value,
            cut_count: model.cuts().len(),
            rounds,
            history: history.clone(),
        };
        if !opts.kc_cuts {
            return Ok(sol);
        }
        let violated = separation_oracle(model, &sol.x, &sol.f, opts.eps);
        if violated.is_empty() {
            return Ok(sol);
        }
        let worst = violated.iter().map(|v| v.violation).fold(0.0, f64::max);
        if rounds >= opts.max_cut_rounds {
            return Err(SolveError::CutRoundsExhausted { solution: Box::new(sol), violation: worst });
        }
        let mut added = 0;
        for v in violated {
            added += model.add_cut(v.cut) as usize;
        }
        if added == 0 {
            // only already-present rows are violated: the solver is off by more than eps
            return Err(SolveError::Lp(LpError::NumericalStall {
                iterations: res.iterations,
                residual: worst.max(capacity_violation(model, &sol.x, &sol.f)),
                min_pivot: f64::NAN,
            }));
        }
    }
}
