//! Batch front-end: scenario files, A/B comparisons and run directories.

pub mod ab;
pub mod runner;
pub mod scenario;

pub use ab::{compare_scenarios, run_ab, AbComparison, AbOutcome};
pub use runner::execute;
pub use scenario::{parse_scenario, parse_scenario_as, Mode, RunConfig, RunSpec};
