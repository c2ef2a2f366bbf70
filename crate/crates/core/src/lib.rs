//! Finite-precision planar geometry on dyadic grids.
//!
//! The crate is organised bottom-up:
//!
//! * [`dyadic`] exact grid truncation, directions and projections;
//! * [`fractal`] dyadic cell sets, fractal generators and the `DYCS` file format;
//! * [`complexity`] log-cardinality cover surrogates and box-dimension regression;
//! * [`geometry`] pinned distance / projection images, annulus intersection
//!   covers and two-measurement point reconstruction;
//! * [`selection`] the pair-selection lemma engine and its hypothesis checker;
//! * [`experiments`] bound curves and the seeded studies built on the above;
//! * [`cli`] the `dyadlab` command line driver.

pub mod cli;
pub mod complexity;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod fractal;
pub mod geometry;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
