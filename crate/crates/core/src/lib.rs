pub mod analysis;
pub mod cli;
pub mod error;
pub mod graph;
pub mod hitting;
pub mod linalg;
pub mod metric;
pub mod parallel;
pub mod quotient;
pub mod spectral;
pub mod stationary;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
