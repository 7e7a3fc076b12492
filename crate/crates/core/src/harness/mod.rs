//! Experiment presets, validators, file handling and the command line.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod fs;
pub mod stats;
pub mod validators;

pub use config::{Acceptance, ExperimentConfig, SchemeKind, ValidatorConfig, PRESETS};
pub use experiment::{run_experiment, CsvRow, ExperimentReport, SeedOutcome, Summary};
pub use fs::{truth_path, Access, AuditedFs};
pub use stats::{ks_two_sample, mean, std_dev, KsResult};
pub use validators::{
    bidensity_validator, bidensity_validator_on, coverage_validator, payoff_range, BidensityOutcome,
};
