//! Polytopal mesh optimization for the virtual element method.
//!
//! The crate agglomerates elements of 2D/3D meshes guided by a VEM-specific
//! quality indicator: each element becomes a node of the dual graph, each
//! interior interface an arc weighted by the quality of the pairwise union,
//! and a multilevel K-way partitioner groups elements that merge well.
//! A built-in virtual element solver (2D orders 1..3, 3D order 1) verifies
//! the optimized meshes through patch tests, convergence studies and
//! cost/accuracy delta reports.

pub mod agglomerate;
pub mod config;
pub mod datasets;
pub mod dual;
pub mod geometry;
pub mod mesh;
pub mod partition;
pub mod quality;
pub mod report;
pub mod rng;
pub mod sparse;
pub mod study;
pub mod vem;

mod error;

pub use error::{Error, Result};
