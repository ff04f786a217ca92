//! Semidefinite programming: a dense interior-point solver, a modeling
//! layer for complex matrix inequalities, the divergence and entropy
//! programs, and SDPA import/export.

mod formulations;
pub mod model;
mod sdpa;
mod solver;

pub use formulations::{
    formulate_conditional_smooth, formulate_d2_smooth, formulate_dmax_smooth, guessing_probability,
    solve_conditional, solve_cq_d2_smooth, solve_cq_dmax_purified, solve_cq_dmax_smooth, solve_d2_smooth,
    solve_dmax_smooth, solve_dmax_smooth_purified, solve_dmax_smooth_trace, solve_h2_up_full,
    solve_hypothesis_testing, smoothed_guessing_sup, Certificate, ConditionalProgram, SdpValue, Side,
};
pub use sdpa::{export_sdpa, import_sdpa};
pub use solver::{
    solve, BlockKind, BlockSpec, BlockValue, Constraint, SdpProblem, SdpSettings, SdpSolution, SdpStatus, SymSparse,
};
