//! Experiment runner for the `ris-miso` library: resolves an experiment
//! specification, evaluates analytic curves alongside Monte-Carlo
//! estimates, and writes plot-ready CSV or JSON tables.

pub mod error;
pub mod experiment;
pub mod output;
pub mod spec;

pub use error::{CliError, Result};
pub use experiment::{all_checks_passed, run_experiment};
pub use output::{ExperimentResult, Metadata};
pub use spec::{validate_spec, Command, ExperimentSpec, OutputFormat, RawSpec, Scenario};
