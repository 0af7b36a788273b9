//! Scenario configuration, execution and output.

pub mod catalog;
pub mod config;
pub mod csv;
pub mod run;
pub mod svg;

pub use catalog::{builtin_batch, list_builtin_scenarios, CatalogEntry};
pub use config::{Batch, Scenario, Task};
pub use run::{run_batch, run_scenario, Outcome, RunOptions, Summary};
