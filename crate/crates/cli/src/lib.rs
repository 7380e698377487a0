//! Library side of the `spraylab` command-line tool: configuration,
//! command dispatch and table I/O.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{run, Command, Outcome, ScenarioName};
pub use config::{Format, Overrides, RunConfig};
pub use error::CliError;
pub use table::Table;
