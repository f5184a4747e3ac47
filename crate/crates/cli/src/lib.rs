//! Scenario files and command implementations behind the `transtab` binary.
//!
//! Each command returns the text it would print, so the binary stays a thin
//! dispatcher and the commands can be exercised directly.

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::{check, init, load, reduce, run, run_batch, Loaded};
pub use error::CliError;
pub use scenario::ScenarioFile;
