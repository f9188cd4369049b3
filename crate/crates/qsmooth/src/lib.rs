//! Experiment driver for discrete randomized smoothing with quantum amplitude
//! estimation: configuration, instance generators, file formats, CSV/SVG
//! output, and the command-line front end's building blocks.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod numfmt;
pub mod run;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind, RawConfig};
pub use error::{CliError, Result};
