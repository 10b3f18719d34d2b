//! Local temperatures of non-equilibrium reservoirs, master-equation
//! thermometers and a squeezed-bath quantum Otto engine.
//!
//! Units: ħ = k_B = 1 throughout.

pub mod baths;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod qcore;
pub mod report;
pub mod thermoledger;

pub use error::{Error, Result};
