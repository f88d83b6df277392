//! Batched stepping, file formats and the `hydroshear` command line on top
//! of `hydroshear-core`.
//!
//! - [`batch`]: [`BatchSim`], synthetic benchmark trajectories, timing and
//!   scaling-exponent fits
//! - [`io`]: trajectory, field, surface-sample, lattice SDF and STL files
//! - [`config`]: TOML scenario and parameter files
//! - [`dataset`]: calibration dataset directories
//! - [`cli`]: subcommands and exit codes

pub mod batch;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod io;
pub mod plot;

pub use batch::{BatchSim, Model, ModelKind};
pub use error::{Result, SimError};
