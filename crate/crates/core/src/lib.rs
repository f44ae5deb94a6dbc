//! Multi-penalty manifold regularization with Nyström subsampling.
//!
//! The crate fits kernel least-squares estimators with several graph-Laplacian
//! penalties, either over all points or over a subsampled set of landmarks,
//! combines several Nyström approximants by the linear functional strategy,
//! and runs the multi-view variant with a learned combination operator.

// view slices are ranges, and a single view is a one-element list of them
#![allow(clippy::single_range_in_vec_init)]

pub mod aggregation;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod modelsel;
pub mod multiview;
pub mod solver;

pub use error::{Error, ErrorClass, Result};
