//! Configuration, sweeps and figure-data generation on top of the
//! `oemlink` model.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod figure;
pub mod sweep;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use figure::{emit_figure, Figure};
pub use sweep::{run_sweep, Axis, Observable, SweepSpec, SweepTable};
