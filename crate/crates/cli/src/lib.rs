//! Reproducible experiment driver for the `kmtlab-core` couplings.
//!
//! A run is a pure function of its [`ExperimentConfig`]: each replication
//! draws from its own counter-based stream, so the worker count changes
//! wall time only.

pub mod config;
pub mod error;
pub mod experiment;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use experiment::{load_aggregate, norms_table, run_experiment, Aggregate, Meta, RunReport};
pub use svg::{emit_svg, Plot, Series, Style};
