pub mod error;
pub mod models;
pub mod numerics;
pub mod pricing;
pub mod simulation;
pub mod structure;

#[cfg(feature = "cli")]
pub mod cli;

mod serde_util;

pub use error::{Error, Result};
