//! File-based front end for limited-interval model order reduction: system
//! and configuration files, the reduction pipeline, reports and response
//! data.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod response;
pub mod run;
pub mod sysfile;

pub use config::{Grid, Method, RunConfig};
pub use error::{CliError, CliResult, ParseError};
pub use report::ReductionReport;
pub use run::{run, run_with_system, RunOutcome};
pub use sysfile::{load_system, write_system};
