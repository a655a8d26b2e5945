//! Seeded experiment sweeps.
//!
//! A sweep draws `trials` random deployments, estimates one propagation
//! table per deployment and evaluates every (antenna count, scheme, method)
//! combination on it. Output is a flat list of [`ResultRecord`]s that
//! serializes to CSV, plus per-configuration summaries.

mod aggregate;
mod config;
mod experiment;

pub use aggregate::{aggregate, write_summary_csv, SummaryRow};
pub use config::{ExperimentConfig, Method};
pub use experiment::{read_csv, run_experiment, run_trial, write_csv, ResultRecord};
