//! Numerical laboratory for the p-Laplacian on flat grids and rotationally
//! symmetric manifolds.
//!
//! The crate is `no_std` (with `alloc`) so the numerical kernels can be reused
//! anywhere; file formats and the command line live in the `plap` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod entropy;
pub mod elliptic;
pub mod calc;
pub mod error;
pub mod field;
pub mod geometry;
pub mod imcf;
pub mod jet;
pub mod linalg;
pub mod math;
pub mod parabolic;
pub mod quad;
pub mod report;

pub use error::{Error, Result};
pub use field::{Grid2d, Layout, Mesh1d, ScalarField};
pub use geometry::{MetricName, WarpedMetric};
pub use report::EstimateReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
