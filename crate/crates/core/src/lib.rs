//! Static Var Compensator allocation planning for meshed transmission networks.
//!
//! The planner builds a line-flow-based second-order cone model of the network
//! over a set of probability-weighted load scenarios, adds binary siting
//! variables for candidate buses, and solves the resulting mixed-integer conic
//! program by branch-and-bound over interior-point relaxations. Allocations can
//! be cross-checked against a full Newton-Raphson AC power flow.
//!
//! Module map:
//!
//! * [`network`] - case files, physical data model, load scenarios
//! * [`lfb`] - incidence matrices, cycle basis, line-flow constraint blocks
//! * [`micp`] - variable indexing, objective, reformulations, program assembly
//! * [`conic`] - standard-form conic programs and the interior-point backend
//! * [`bnb`] - branch-and-bound over siting binaries
//! * [`acpf`] - AC power flow validation of planning results
//! * [`planner`] - end-to-end experiment driver and report writers
//!
//! The numeric layers ([`conic`], [`bnb`], [`acpf::newton`]) are generic over
//! [`Scalar`]; the aliases below fix them to `f64`, which is what the model
//! assembly produces.

pub mod acpf;
pub mod bnb;
pub mod conic;
pub mod lfb;
pub mod micp;
pub mod network;
pub mod planner;
mod scalar;

pub use scalar::Scalar;

/// Conic program over `f64`.
pub type Program = conic::ConicProgram<f64>;
/// Interior-point result over `f64`.
pub type Solution = conic::ConicSolution<f64>;
/// Interior-point settings over `f64`.
pub type Settings = conic::SolverSettings<f64>;
/// Branch-and-bound settings over `f64`.
pub type TreeSettings = bnb::BnbSettings<f64>;
