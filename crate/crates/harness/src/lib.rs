//! Scenario harness: configuration, pipeline orchestration, artifacts
//! and refinement studies for the shock-stability laboratory.

pub mod artifacts;
pub mod config;
pub mod pipeline;
pub mod scenario;
pub mod study;

pub use config::ScenarioConfig;
pub use pipeline::{run_scenario, ScenarioRun};
