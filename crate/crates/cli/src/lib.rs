//! Scenario runner and experiment harness.

pub mod cli;
pub mod experiments;
pub mod output;
pub mod report;
pub mod scenario;

pub use cli::{run_cli, run_scenario};
