//! Command-line front end: config ingestion, pipeline runs, reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, Kind};
pub use report::{report, Summary};
pub use run::{load_config, run, Failure, Manifest, RunOptions};
