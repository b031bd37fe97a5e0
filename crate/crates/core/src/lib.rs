//! Rank-metric scatteredness toolkit over finite field towers.

pub mod error;
pub mod field;
pub mod fp;
pub mod construction;
pub mod job;
pub mod linear;
pub mod verify;
pub mod codes;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
pub use field::{Fe, FieldDescriptor, FieldTower};
