//! Command-line front end: configuration parsing, run orchestration and
//! the output files.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod besov;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use audit::cmd_audit;
pub use besov::cmd_besov;
pub use config::{parse_config, RunConfig};
pub use error::{CliError, ErrorCode};
pub use report::cmd_report;
pub use run::{cmd_run, run_config};
