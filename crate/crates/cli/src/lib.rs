//! Scenario runner behind the `egm` command.

pub mod front;
pub mod runner;
pub mod scenario;
pub mod selftest;

use egm_core::EgmError;

pub use runner::{run, simulate, RunOptions, RunReport, RunStatus};
pub use scenario::{parse_scenario, Scenario};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EGM_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const TOLERANCE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const ABORT: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] EgmError),
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Core(#[from] EgmError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}
