//! Value iteration and its goal-directed accelerations: Gauss-Seidel sweeps,
//! parsimonious updates (PVI, PVI1), and distance-ordered sweeps (GVI, DVI)
//! over sparse MDPs.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the precision.

pub mod bellman;
pub mod mdp;
pub mod pipeline;
pub mod problems;
pub mod reachability;
mod scalar;
pub mod solvers;

pub use bellman::{
    apply_bellman, backup_state, bellman_residual, evaluate_policy_exact, induce_policy,
    is_eps_contracted, policy_error_bound, sup_norm_diff,
};
pub use mdp::{MdpBuilder, MdpError, Policy, SparseMdp, ValueFunction};
pub use pipeline::{Pipeline, PipelineReport};
pub use problems::GoalDirectedMdp;
pub use reachability::{ideal_successors, one_step_successors, DistanceMap};
pub use scalar::Scalar;
pub use solvers::{
    refine_with_vi, run_gvi, solve_dvi, solve_gauss_seidel, solve_pvi, solve_pvi1, solve_vi,
    GreedySweep, SolveReport, SolverConfig,
};

pub type SparseMdp64 = SparseMdp<f64>;
pub type SparseMdp32 = SparseMdp<f32>;
pub type ValueFunction64 = ValueFunction<f64>;
pub type ValueFunction32 = ValueFunction<f32>;
pub type GoalDirectedMdp64 = GoalDirectedMdp<f64>;
pub type GoalDirectedMdp32 = GoalDirectedMdp<f32>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type SolveReport64 = SolveReport<f64>;
pub type SolveReport32 = SolveReport<f32>;
