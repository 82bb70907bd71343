//! Experiment runner around `lamecouple-core`: configuration parsing,
//! manufactured problems with closed-form solutions, plain-text mesh
//! formats, and the experiment drivers that emit CSV reports.

pub mod config;
pub mod experiments;
pub mod manufactured;
pub mod meshio;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use experiments::{run, RunError, RunFlags, RunSummary};
