//! Experiment orchestration for the self-similar wave laboratory: configuration,
//! runs for every experiment kind, and reproducible report bundles.

pub mod config;
mod error;
pub mod report;
pub mod run;
pub mod trap;

pub use config::{ExperimentConfig, Kind, SCHEMA_VERSION};
pub use error::{LabError, Stage};
pub use report::{emit_plotdata, ReportBundle, Table};
pub use run::run;
