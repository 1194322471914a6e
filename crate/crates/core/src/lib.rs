//! Constructive simultaneous approximation by translates of an entire
//! function, with certified sup-norm bounds.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod archive;
pub mod builder;
pub mod cli;
pub mod config;
pub mod error;
pub mod extraction;
pub mod geometry;
pub mod mp;
pub mod poly;
pub mod runge;

pub use error::{Error, Result};
