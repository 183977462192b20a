//! Experiment harness for the `lowrank` solvers: TOML experiment specs,
//! seeded batch runs over parameter grids, CSV traces, SVG plots, the
//! replication presets and the acceptance suite.

pub mod cli;
pub mod error;
pub mod plot;
pub mod presets;
pub mod runner;
pub mod spec;
pub mod trace_csv;
pub mod verify;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
