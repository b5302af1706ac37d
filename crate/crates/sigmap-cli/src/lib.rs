//! File formats, configuration and command implementations behind the
//! `sigmap` binary. Kept as a library so integration tests can drive the
//! commands directly.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod provenance;
pub mod smap;

pub use error::{CliError, CliResult};
