//! Library side of the `spdist` command: configuration, pipeline stages and
//! their file formats.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{EmbeddingKind, RunConfig};
pub use error::{CliError, Result};
