//! Standard-form conic programs and their continuous solution.

mod io;
mod program;
mod solver;

pub use io::{read_program, write_program};
pub use program::{Cone, ConeBlock, ConicProgram, ProgramBuilder, ProgramError};
pub use solver::{
    solve, solve_with_fixings, ConicSolution, IterationRecord, ResidualReport, SolveStatus, SolverError, SolverSettings,
};
