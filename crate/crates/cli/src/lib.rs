//! Support library for the `threadrank` binary: file formats, index
//! persistence, and the subcommand implementations.
//!
//! The binary is a thin dispatcher over [`commands`]; everything with
//! behavior worth testing lives here so tests can call it directly.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod commands;
pub mod formats;
pub mod index_io;
pub mod report;
