#![no_std]
extern crate alloc;

pub mod error;
pub mod evaluation;
pub mod forecasting;
pub mod kernels_acf;
pub mod market_data;
pub mod math;
pub mod memory;
pub mod realized_measures;
pub mod roughness;
pub mod simulation;

pub use error::{Error, ErrorClass, Result};
