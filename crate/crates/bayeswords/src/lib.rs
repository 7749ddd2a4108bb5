//! Files, persistence, experiment pipelines and the `bayeswords` command
//! line on top of `bayeswords-core`.

pub mod config;
pub mod error;
pub mod features;
pub mod io;
pub mod persist;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
