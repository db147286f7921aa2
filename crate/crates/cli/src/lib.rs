//! Declarative experiment driver: a TOML config names a model, the checks
//! to run and the parameter grids; results go to a JSON-lines record
//! stream, a CSV summary and a content-addressed cache.

pub mod config;
pub mod model;
pub mod output;
pub mod record;
pub mod run;

pub use config::{ExperimentConfig, PointConfig, Task};
pub use record::ResultRecord;
pub use run::{run_gap_and_bounds, run_point, run_scaling, run_sweep, run_verify, RunOptions};
