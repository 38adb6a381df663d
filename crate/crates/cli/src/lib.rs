//! Scenario runner for the quantum Smoluchowski dynamics toolkit.
//!
//! Reads a flat `key = value` config, dispatches to the dispersion and PDE
//! solvers, and writes deterministic CSV trajectories plus a `meta.txt`
//! with the fully resolved parameter set.

// `!(x > 0)` rather than `x <= 0`: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

pub mod config;
pub mod output;
pub mod runner;
pub mod sweep;

/// Failures are split by exit code: bad configuration (2) vs solver
/// breakdown (3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "config error: {msg}"),
            Self::Solver(msg) => write!(f, "solver error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qsd_core::Error> for CliError {
    fn from(e: qsd_core::Error) -> Self {
        Self::Solver(e.to_string())
    }
}
