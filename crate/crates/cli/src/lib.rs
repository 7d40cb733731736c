//! Experiment harness for `mincurv`: JSON configs, staged pipelines,
//! CSV/JSON/SVG artifacts and a run manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod svg;
pub mod table;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use manifest::RunManifest;
pub use pipeline::run_pipeline;
