//! Experiment runner for the nsco solvers: builds problems from TOML configs,
//! computes reference optima, runs epsilon sweeps into CSV traces and fits
//! log-log slopes of oracle calls.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod problem;
pub mod reference;
pub mod run;
pub mod slopes;

pub use config::{ExperimentConfig, ProblemConfig, SolverConfig, SolverName};
pub use error::{HarnessError, Result};
pub use problem::Problem;
pub use reference::{reference_optimum, Reference};
pub use run::{run_experiment, AggregateRow, ExperimentSummary, RunRow};
pub use slopes::{fit_slope, fit_slopes, fit_slopes_file, Metric, SlopeReport};
