//! Algebraic multigrid with a data-driven strong threshold.
//!
//! The crate assembles finite-difference benchmark systems, solves them with
//! a classical AMG V-cycle, sweeps the strong threshold to find the value
//! that minimises the iteration count, and learns the map from grid size to
//! that optimum with Gaussian process regression over a library of composite
//! kernels. A nine-metric battery scores the learned predictors.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amg;
pub mod error;
pub mod experiment;
pub mod gpr;
pub mod metrics;
pub mod problems;
pub mod sparse;

pub use error::{Error, Result};
