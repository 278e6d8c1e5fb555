//! Command-line frontend for the LV-RM toolkit: scenario runs, parameter-plane
//! scans and the reproduction matrix over the bundled corpus.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod reproduce;
pub mod scan;
pub mod scenario;

pub use error::{CliError, CliResult};
