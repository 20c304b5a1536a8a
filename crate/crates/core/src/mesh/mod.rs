//! Indexed polygonal/polyhedral mesh representation.
//!
//! Meshes store vertices, faces (vertex cycles) and, in 3D, cells as lists
//! of face indices with per-cell orientation signs, so a face shared by two
//! cells is stored once. Full adjacency and boundary flags are derived at
//! build time and all queries afterwards are read-only.

pub mod io;
pub(crate) mod mesh2;
pub(crate) mod mesh3;

pub use io::{read_mesh2, read_mesh3, write_mesh2, write_mesh3};
pub use mesh2::Mesh2;
pub use mesh3::Mesh3;

use nalgebra::{Point2, Point3};

/// Geometric measures of a single element.
#[derive(Debug, Clone)]
pub struct ElementMeasures {
    /// Area (2D) or volume (3D).
    pub size: f64,
    /// Barycenter, padded with zero in 2D.
    pub centroid: Point3<f64>,
    /// Max pairwise vertex distance of the element.
    pub diameter: f64,
    /// Boundary edge lengths (2D only).
    pub edge_lengths: Vec<f64>,
    /// Face diameters (3D only).
    pub face_diameters: Vec<f64>,
}

/// Either kind of mesh, for code paths shared between dimensions.
#[derive(Debug, Clone)]
pub enum Mesh {
    Two(Mesh2),
    Three(Mesh3),
}

impl Mesh {
    pub fn dim(&self) -> usize {
        match self {
            Mesh::Two(_) => 2,
            Mesh::Three(_) => 3,
        }
    }

    pub fn num_elements(&self) -> usize {
        match self {
            Mesh::Two(m) => m.num_faces(),
            Mesh::Three(m) => m.num_cells(),
        }
    }

    pub fn measures(&self, element: usize) -> crate::Result<ElementMeasures> {
        match self {
            Mesh::Two(m) => m.measures(element),
            Mesh::Three(m) => m.measures(element),
        }
    }

    /// Mesh size h: the max element diameter.
    pub fn mesh_size(&self) -> f64 {
        let n = self.num_elements();
        (0..n)
            .map(|e| self.measures(e).map(|m| m.diameter).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    pub fn total_measure(&self) -> f64 {
        let n = self.num_elements();
        (0..n)
            .map(|e| self.measures(e).map(|m| m.size).unwrap_or(0.0))
            .sum()
    }
}

pub(crate) fn dist2(a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a - b).norm()
}

pub(crate) fn dist3(a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    (a - b).norm()
}
