#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod audit;
pub mod binary;
pub mod cli;
pub mod config;
pub mod dlap;
pub mod error;
pub mod harness;
pub mod histogram;
pub mod lattice;
pub mod pmf;
pub mod precision;
pub mod real;
pub mod search;

pub use error::{Error, Result};
pub use pmf::Pmf;
pub use precision::PrecisionContext;
