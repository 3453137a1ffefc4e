//! Line-flow-based network constraints.
//!
//! Flows are carried as receiving-end powers `P^r, Q^r` with explicit branch
//! losses, and voltages only through their squares `W = V²`. This keeps the
//! voltage-drop, balance and loop-angle relations linear and the loss relation
//! a rotated second-order cone.

mod block;
mod cycles;
mod incidence;

pub use block::{
    assemble_lfb, loop_residuals, reactive_balance, ChargingConvention, FormulationError, LfbBlock, LfbConfig,
};
pub use cycles::{build_cycle_basis, build_cycle_basis_from, CycleBasis};
pub use incidence::{build_incidence, FlowIncidence};
