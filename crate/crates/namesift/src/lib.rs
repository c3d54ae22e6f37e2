//! File formats, experiment driver and command-line front end around
//! [`namesift_core`].

#![deny(missing_debug_implementations)]

pub mod config;
pub mod corpus_io;
pub mod experiment;
pub mod markup;
pub mod report;
pub mod synthetic;

pub use config::{ConfigArgs, OutputFormat, RunConfig};
pub use corpus_io::{load_task, validate_corpus, write_task, LoadOptions};
pub use experiment::{run_grid, GridOutput, RunSpec};
pub use namesift_core;
