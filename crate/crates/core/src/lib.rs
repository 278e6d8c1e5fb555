//! Analysis and simulation of the dimensionless LV-RM resource-consumer model.

pub mod dopri;
pub mod equilibrium;
pub mod error;
pub mod expansion;
pub mod export;
pub mod hopf;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod simulate;
pub mod spectral;
pub mod zerohopf;

pub use error::{Error, Result};
pub use model::{ModelParams, SuccessState};
