//! Finite branched-manifold path sums.
//!
//! Layered simplicial complexes carry positive, conserved branch weights.
//! This crate builds and validates such complexes, solves and counts the
//! conservation constraints exactly, evaluates entropy-weighted path sums
//! against exact oracles, and simulates entropic collapse.

pub mod action;
pub mod collapse;
pub mod complex;
pub mod error;
pub mod linalg;
mod lp;
pub mod numeric;
pub mod paths;
pub mod propagator;
pub mod rational;
pub mod templates;
pub mod weights;

pub use complex::{build_complex, refine, BoundaryMatrix, BranchedComplex, ComplexDescription};
pub use error::{Error, Result};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
