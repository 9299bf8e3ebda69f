//! Configuration, file formats and pipelines behind the `abpole` binary.

pub mod config;
pub mod io;
pub mod run;
