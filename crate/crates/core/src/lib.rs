//! Exact and high-precision distributions of the largest and smallest
//! component sizes for exp-log labeled structures, with their limiting
//! constants and an independent enumeration oracle.

pub mod catalog;
pub mod constants;
pub mod engine;
pub mod error;
pub mod numfmt;
pub mod oracle;
pub mod stats;

pub use catalog::{ExpLogParam, NormalizerRule, ScalingDivisors, Statistic, Structure};
pub use engine::{build, build_largest, build_smallest, CountTable, Mode, ResourceBudget, TableValue};
pub use error::{Error, Result};
