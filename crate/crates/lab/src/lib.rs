//! Experiment drivers, file formats and reports for the `riesz-swarm` CLI.

pub mod error;
pub mod experiments;
pub mod io;
pub mod report;

pub use error::{LabError, Result};
pub use report::{ExperimentReport, Outcome};
