//! Branch-and-bound over the siting binaries.
//!
//! Nodes are explored best-bound first; each node solves its continuous
//! relaxation from a cold start. Integral relaxations and rounded relaxations
//! are re-solved with every binary fixed before they may become the incumbent,
//! so incumbents are exactly integral.

mod result;
mod tree;

pub use result::{
    cone_mismatch, local_search, placement_objective, solve_misocp, solve_misocp_seeded, solve_without_devices,
    AllocationResult, ObjectiveBreakdown, ScenarioOutcome, SearchStats,
};
pub use tree::{
    branch, branch_and_bound, branch_and_bound_with, enumerate_placements, fractional_positions, round_heuristic,
    write_node_log, BnbError, BnbSettings, NodeAction, NodeRecord, SearchHooks, TreeOutcome, TreeStatus,
};
