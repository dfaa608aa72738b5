//! Sweep orchestration for the `rabidimer` command-line tool.
//!
//! A run is described by a [`SweepConfig`]: a mode, grids over `g`, `η` and `J`,
//! and solver settings. [`sweep::run`] computes every grid point that is not yet
//! recorded in the checkpoint log, then writes the mode's CSV, text and JSON
//! artifacts to the output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod cli;
pub mod config;
mod error;
pub mod output;
pub mod sweep;

pub use config::{parse_grid, JGrid, Mode, Settings, SweepConfig};
pub use error::{CliError, Result};
pub use output::{Flag, ResultRow};
pub use sweep::{run, RunSummary};
