//! Configuration, reports, verification suites and refinement studies for the
//! `quasilocal` command.

pub mod config;
pub mod convergence;
pub mod error;
pub mod report;
pub mod verify;

pub use config::RunConfig;
pub use convergence::{run_convergence, ConvergenceRow};
pub use error::{CliError, Result};
pub use report::{compute, to_json, write_json, Report};
pub use verify::{run_verify, Check, Suite};
