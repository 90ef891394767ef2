//! Independent reference solvers and checkers for small instances.

mod brute;
mod lp;
mod timing;

use thiserror::Error;

pub use brute::{brute_force, brute_force_with, random_micro_instance, BruteForceOptions, MicroConfig, BRUTE_FORCE_LIMIT};
pub use lp::{
    build_arc_graph, check_lp_assignment, deadhead_allowed, emit_lp, lp_string, ArcGraph, ArcKind, GraphArc,
    LpAssignment, LpCheck, LpViolation, Node,
};
pub use timing::{brute_force_leg, brute_force_schedule, verify_schedule, ScheduleViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for enumeration: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("time grid: {0}")]
    Granularity(String),
    #[error("no feasible schedule")]
    Infeasible,
}
