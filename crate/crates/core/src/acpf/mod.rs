//! Nonlinear AC power flow used to referee planning results.

mod newton;
mod validate;

pub use newton::{admittance, injections, newton_raphson, AcSolution, BusKind, Setpoint, MAX_ITERATIONS};
pub use validate::{validate, validate_scenario, ScenarioValidation, ValidationReport, AC_TOLERANCE};
