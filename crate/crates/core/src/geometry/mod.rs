//! Computational-geometry primitives behind the quality indicators:
//! polygon/polyhedron kernels and collinear boundary edge chains.

mod polygon;
mod polyhedron;

pub use polygon::{
    collinear_chains, ear_clip, polygon_area, polygon_diameter, polygon_kernel, EdgeChains,
};
pub use polyhedron::{polyhedron_kernel, ConvexPolytope};

use nalgebra::Point3;

/// Kernel of a polytope: the (convex, possibly empty) set of points from
/// which the whole polytope is visible.
#[derive(Debug, Clone)]
pub struct KernelRegion {
    pub dim: usize,
    /// Vertices of the kernel polytope; empty when the element is not
    /// star-shaped. 2D kernels live in the z = 0 plane.
    pub vertices: Vec<Point3<f64>>,
    /// Area (2D) or volume (3D) of the kernel.
    pub measure: f64,
}

impl KernelRegion {
    pub fn empty(dim: usize) -> Self {
        Self { dim, vertices: Vec::new(), measure: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.measure == 0.0
    }
}
