//! Finger-geometry biometrics.

pub mod classify;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod imaging;
pub mod selection;

pub use error::{Error, Result};
