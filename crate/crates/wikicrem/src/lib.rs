//! File formats, external processes, parallel pipelines and the command line
//! around `wikicrem-core`.

pub mod conformance;
pub mod corpus;
pub mod config;
pub mod datasets;
pub mod error;
pub mod pipeline;
pub mod protocol;
pub mod records;
pub mod report;

pub use error::{Error, Result};
