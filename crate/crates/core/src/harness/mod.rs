//! Experiment runner: configuration, sampling loops, statistics and reports.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;

pub use config::{Experiment, ExperimentConfig, Format, Overrides};
pub use experiments::run;
pub use report::{Row, TrialReport};
pub use stats::confidence_interval;
