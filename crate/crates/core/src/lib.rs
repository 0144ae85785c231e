//! One-clean-qubit communication protocols: a dense simulator, the
//! protocol transformations between clean-qubit budgets and measurement
//! forms, built-in problem families, and classical baselines.

pub mod classical;
pub mod error;
pub mod problems;
pub mod protocol;
pub mod qstate;
pub mod simulator;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
