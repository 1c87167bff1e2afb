//! Experiment configs, run records and the runners behind the CLI.

mod config;
mod experiments;
mod record;

pub use config::*;
pub use experiments::*;
pub use record::*;
