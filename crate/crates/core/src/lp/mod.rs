//! Linear programming: a small simplex core and the fault-tolerant 2-spanner
//! relaxation solved by cutting planes.

pub mod simplex;
pub mod model;
pub mod solve;

pub use model::{
    build_base_lp, capacity_violation, separation_oracle, FractionalSolution, KnapsackCoverCut, LpModel,
    LpModelError, PathVar, ViolatedCut,
};
pub use simplex::{LinearProgram, LpOptions, LpResult, LpStatus, Relation};
pub use solve::{solve_lp, solve_model, SolveError, SolveOptions};
