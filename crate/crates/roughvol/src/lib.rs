//! File formats, configuration, pipeline orchestration and the `roughvol` command line.

pub use roughvol_core as core;

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod signature;
pub mod units;

pub use error::{Error, Result};
