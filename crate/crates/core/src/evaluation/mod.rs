//! Forecast evaluation and increment distributions.

mod distributions;
mod loss;
mod mcs;

pub use distributions::*;
pub use loss::*;
pub use mcs::*;
