//! Library side of the `nrflow` command-line tool: config parsing, trace files
//! and the subcommand implementations.

pub mod alphas;
pub mod commands;
pub mod config;
pub mod error;
pub mod trace_file;

pub use alphas::parse_alphas;
pub use commands::{certify_cmd, rootlocus_cmd, simulate, sweep, sweep_cmd, SweepRow};
pub use config::{Scenario, ScenarioConfig, SystemConfig};
pub use error::{exit, CliError};
pub use trace_file::{read_table, write_trace, Table};
