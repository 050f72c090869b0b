//! Files, command orchestration and the `hrvkit` command line on top of
//! [`hrvkit_core`].

pub mod commands;
pub mod error;
pub mod io;
pub mod tables;

pub use error::{CliError, Result};
