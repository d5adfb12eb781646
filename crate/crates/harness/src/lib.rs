//! Experiment harness for varying-density sensorimotor maps: configuration,
//! evaluation reports, CSV and snapshot formats, and scenario runs.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod report;
pub mod scenario;
pub mod snapshot;

pub use config::{DecodeMode, ExperimentConfig, Scenario};
pub use error::{Stage, StageError};
pub use report::{evaluate, ErrorReport, ErrorStats, NodeGrid};
pub use scenario::{datasets, pairs, run_scenario, train_model, Datasets, RunOutcome};
pub use snapshot::{Snapshot, SnapshotError, SCHEMA_VERSION};
