//! Iterative solvers and their telemetry.

mod config;
mod factored;
mod pprojgd;
mod projgd;
mod run;
mod trace;

pub use config::{Algorithm, PprojParams, PrecReg, SolverConfig};
pub use factored::{
    fgd_step, precgd_step, scaledgd_step, Factors, GramReport, GRAM_BREAKDOWN_CONDITION,
    GRAM_PINV_TOL,
};
pub use pprojgd::{boundary_step_length, pprojgd, tangent_space_steps};
pub use projgd::projgd_step;
pub use run::run_solver;
pub use trace::{Branch, Checkpoint, IterRecord, SolverTrace, Status};
