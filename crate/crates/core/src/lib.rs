pub mod ansatz;
pub mod encoding;
pub mod engines;
pub mod error;
pub mod harness;
pub mod instances;
pub mod simulator;

pub use error::{Error, Result};
