//! Batch front end for the `cksvar` library: CSV ingestion, run
//! configuration, subcommands and run manifests.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod manifest;

pub use commands::{Command, Seeds};
pub use config::RunConfig;
pub use data::{export, ingest, IngestReport, Ingested};
pub use error::{CliError, CliResult};
pub use manifest::{rerun, run, Manifest};
