//! Deterministic network simulator and scenario runner for the chain.

pub mod bus;
pub mod cli;
pub mod config;
pub mod report;
pub mod scenario;

pub use bus::{Bus, Scheduled, TopicStats};
pub use config::{ConfigError, ScenarioConfig};
pub use report::{Class, ScenarioReport};
pub use scenario::{run_scenario, ScenarioError, Simulation};
