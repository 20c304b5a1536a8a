//! VEM-oriented quality indicators: per-element sub-indicators, the combined
//! element quality and the global mesh quality.
//!
//! 2D sub-indicators of a polygon P:
//!   rho1 = |kernel(P)| / |P|
//!   rho2 = min(sqrt(|P|), min edge length) / h_P
//!   rho3 = 3 / #edges
//!   rho4 = min over collinear chains of (min edge / max edge in the chain)
//! combined into sqrt((rho1*rho2 + rho1*rho3 + rho1*rho4) / 3).
//!
//! 3D sub-indicators of a cell P with faces F (each face evaluated with the
//! 2D indicators in its own best-fit plane):
//!   rho1 = (|kernel(P)| / |P|) * prod_F rho1(F)
//!   rho2 = [min(cbrt(|P|), min_F h_F) / h_P + mean_F rho2(F)] / 2
//!   rho3 = [4 / #faces + mean_F rho3(F)] / 2
//! combined into sqrt((rho1*rho2 + rho1*rho3) / 2).
//!
//! Every component lies in [0, 1]; the element quality is 0 exactly when the
//! element (or, in 3D, one of its faces) is not star-shaped.

use nalgebra::{Matrix3, Point2, Point3, Vector3};

use crate::geometry::{collinear_chains, polygon_area, polygon_diameter, polygon_kernel};
use crate::mesh::{Mesh, Mesh2, Mesh3};
use crate::{Error, Result};

/// Per-element sub-indicator values plus the combined element quality.
#[derive(Debug, Clone)]
pub struct QualityVector {
    /// rho1..rho4 in 2D, rho1..rho3 in 3D.
    pub components: Vec<f64>,
    /// Combined element quality in [0, 1].
    pub element: f64,
}

/// 2D indicators of a standalone CCW polygon.
pub fn polygon_quality(poly: &[Point2<f64>]) -> Result<QualityVector> {
    let area = polygon_area(poly);
    let diameter = polygon_diameter(poly);
    if area <= crate::config::DEGENERACY_TOL * diameter * diameter {
        return Err(Error::DegenerateElement { element: usize::MAX });
    }
    let n = poly.len();
    let edge_len =
        |i: usize| -> f64 { (poly[(i + 1) % n] - poly[i]).norm() };
    let rho1 = (polygon_kernel(poly).measure / area).min(1.0);
    let min_edge = (0..n).map(edge_len).fold(f64::INFINITY, f64::min);
    let rho2 = (area.sqrt().min(min_edge) / diameter).min(1.0);
    let rho3 = 3.0 / n as f64;
    let rho4 = collinear_chains(poly)
        .chains
        .iter()
        .map(|chain| {
            let lens: Vec<f64> = chain.iter().map(|&e| edge_len(e)).collect();
            let lo = lens.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let hi = lens.iter().fold(0.0f64, |a, &b| a.max(b));
            lo / hi
        })
        .fold(f64::INFINITY, f64::min);
    let element = ((rho1 * rho2 + rho1 * rho3 + rho1 * rho4) / 3.0).sqrt();
    Ok(QualityVector { components: vec![rho1, rho2, rho3, rho4], element })
}

pub fn quality_2d(mesh: &Mesh2, face: usize) -> Result<QualityVector> {
    polygon_quality(&mesh.face_polygon(face)).map_err(|e| match e {
        Error::DegenerateElement { .. } => Error::DegenerateElement { element: face },
        e => e,
    })
}

/// 3D indicators of a standalone cell given by outward-oriented face cycles.
pub fn cell_quality(vertices: &[Point3<f64>], faces: &[Vec<usize>]) -> Result<QualityVector> {
    // Volume and diameter straight from the oriented boundary.
    let mut volume = 0.0;
    for cycle in faces {
        let p0 = vertices[cycle[0]].coords;
        for t in 1..cycle.len() - 1 {
            volume += p0.dot(&vertices[cycle[t]].coords.cross(&vertices[cycle[t + 1]].coords)) / 6.0;
        }
    }
    let mut vs: Vec<usize> = faces.iter().flatten().copied().collect();
    vs.sort_unstable();
    vs.dedup();
    let mut diameter = 0.0f64;
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            diameter = diameter.max((vertices[vs[i]] - vertices[vs[j]]).norm());
        }
    }
    if volume <= crate::config::DEGENERACY_TOL * diameter.powi(3) {
        return Err(Error::DegenerateElement { element: usize::MAX });
    }

    let nf = faces.len() as f64;
    let mut prod_rho1 = 1.0;
    let mut sum_rho2 = 0.0;
    let mut sum_rho3 = 0.0;
    let mut min_hf = f64::INFINITY;
    for cycle in faces {
        let flat = project_to_plane(vertices, cycle);
        let q = polygon_quality(&flat)?;
        prod_rho1 *= q.components[0];
        sum_rho2 += q.components[1];
        sum_rho3 += q.components[2];
        min_hf = min_hf.min(polygon_diameter(&flat));
    }
    let kernel = crate::geometry::polyhedron_kernel(vertices, faces, volume, diameter);
    let rho1 = ((kernel.measure / volume).min(1.0) * prod_rho1).min(1.0);
    let rho2 = 0.5 * (volume.cbrt().min(min_hf) / diameter + sum_rho2 / nf).min(2.0);
    let rho3 = 0.5 * (4.0 / nf + sum_rho3 / nf);
    let element = ((rho1 * rho2 + rho1 * rho3) / 2.0).sqrt();
    Ok(QualityVector { components: vec![rho1, rho2, rho3], element })
}

pub fn quality_3d(mesh: &Mesh3, cell: usize) -> Result<QualityVector> {
    let faces: Vec<Vec<usize>> =
        (0..mesh.cells[cell].len()).map(|i| mesh.oriented_face(cell, i)).collect();
    cell_quality(&mesh.vertices, &faces).map_err(|e| match e {
        Error::DegenerateElement { .. } => Error::DegenerateElement { element: cell },
        e => e,
    })
}

pub fn element_quality(mesh: &Mesh, element: usize) -> Result<QualityVector> {
    match mesh {
        Mesh::Two(m) => quality_2d(m, element),
        Mesh::Three(m) => quality_3d(m, element),
    }
}

/// Mesh quality: sqrt of the mean element quality.
pub fn mesh_quality(mesh: &Mesh) -> Result<f64> {
    let n = mesh.num_elements();
    if n == 0 {
        return Err(Error::EmptyMesh);
    }
    let mut sum = 0.0;
    for e in 0..n {
        sum += element_quality(mesh, e)?.element;
    }
    Ok((sum / n as f64).sqrt())
}

/// Projects a face cycle onto its least-squares plane, returning a CCW 2D
/// polygon. For planar faces this is an isometry of the face.
pub fn project_to_plane(vertices: &[Point3<f64>], cycle: &[usize]) -> Vec<Point2<f64>> {
    let n = cycle.len();
    let centroid =
        cycle.iter().fold(Vector3::zeros(), |acc, &v| acc + vertices[v].coords) / n as f64;
    let mut cov = Matrix3::zeros();
    for &v in cycle {
        let d = vertices[v].coords - centroid;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut imin = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
    }
    let normal = eig.eigenvectors.column(imin).into_owned();
    let mut u = normal.cross(&Vector3::x());
    if u.norm() < 1e-9 {
        u = normal.cross(&Vector3::y());
    }
    let u = u.normalize();
    let w = normal.cross(&u).normalize();
    let mut flat: Vec<Point2<f64>> = cycle
        .iter()
        .map(|&v| {
            let d = vertices[v].coords - centroid;
            Point2::new(d.dot(&u), d.dot(&w))
        })
        .collect();
    if polygon_area(&flat) < 0.0 {
        flat.reverse();
    }
    flat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh2;
    use approx::assert_relative_eq;

    #[test]
    fn equilateral_triangle_quality() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.5, 3.0f64.sqrt() / 2.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let q = quality_2d(&m, 0).unwrap();
        assert_relative_eq!(q.components[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(q.components[1], (3.0f64.sqrt() / 4.0).sqrt(), epsilon = 1e-10);
        assert_relative_eq!(q.components[2], 1.0);
        assert_relative_eq!(q.components[3], 1.0, epsilon = 1e-12);
        let expected = (((3.0f64.sqrt() / 4.0).sqrt() + 1.0 + 1.0) / 3.0).sqrt();
        assert_relative_eq!(q.element, expected, epsilon = 1e-10);
        assert!((q.element - 0.94129).abs() < 1e-4);
    }

    #[test]
    fn unit_square_quality() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let q = quality_2d(&m, 0).unwrap();
        assert_relative_eq!(q.components[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(q.components[1], 1.0 / 2.0f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(q.components[2], 0.75);
        assert_relative_eq!(q.components[3], 1.0);
        let expected = ((1.0 / 2.0f64.sqrt() + 0.75 + 1.0) / 3.0).sqrt();
        assert_relative_eq!(q.element, expected, epsilon = 1e-12);
        assert!((q.element - 0.90500).abs() < 1e-4);
    }

    #[test]
    fn non_star_shaped_polygon_scores_zero() {
        let poly: Vec<Point2<f64>> = [
            (0.0, 0.0),
            (3.0, 0.0),
            (3.0, 3.0),
            (2.0, 3.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 3.0),
            (0.0, 3.0),
        ]
        .iter()
        .map(|&(x, y)| Point2::new(x, y))
        .collect();
        let q = polygon_quality(&poly).unwrap();
        assert_eq!(q.components[0], 0.0);
        assert_eq!(q.element, 0.0);
    }

    #[test]
    fn regular_tetrahedron_rho3_is_one() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 3.0f64.sqrt() / 2.0, 0.0),
            Point3::new(0.5, 3.0f64.sqrt() / 6.0, (2.0f64 / 3.0).sqrt()),
        ];
        // Outward-oriented faces.
        let faces = vec![vec![0, 2, 1], vec![0, 1, 3], vec![1, 2, 3], vec![0, 3, 2]];
        let q = cell_quality(&v, &faces).unwrap();
        assert_relative_eq!(q.components[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_cube_quality() {
        let m = crate::mesh::mesh3::tests::unit_cube();
        let q = quality_3d(&m, 0).unwrap();
        assert_relative_eq!(q.components[0], 1.0, epsilon = 1e-9);
        let rho2 = 0.5 * (1.0 / 3.0f64.sqrt() + 1.0 / 2.0f64.sqrt());
        assert_relative_eq!(q.components[1], rho2, epsilon = 1e-9);
        let rho3 = 0.5 * (4.0 / 6.0 + 0.75);
        assert_relative_eq!(q.components[2], rho3, epsilon = 1e-12);
        let expected = ((rho2 + rho3) / 2.0).sqrt();
        assert_relative_eq!(q.element, expected, epsilon = 1e-9);
        assert!((q.element - 0.82176).abs() < 1e-4);
    }

    #[test]
    fn mesh_quality_of_identical_squares() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0),
                Point2::new(0.0, 1.0),
                Point2::new(1.0, 1.0),
                Point2::new(2.0, 1.0),
            ],
            vec![vec![0, 1, 4, 3], vec![1, 2, 5, 4]],
        )
        .unwrap();
        let q = mesh_quality(&Mesh::Two(m)).unwrap();
        let square = ((1.0 / 2.0f64.sqrt() + 0.75 + 1.0) / 3.0f64).sqrt();
        assert_relative_eq!(q, square.sqrt(), epsilon = 1e-12);
        assert!((q - 0.95131).abs() < 1e-4);
    }

    #[test]
    fn scale_invariance() {
        for seed in 0..20u64 {
            let poly = crate::geometry::tests_support::random_star_polygon(seed);
            let scaled: Vec<Point2<f64>> =
                poly.iter().map(|p| Point2::new(p.x * 137.0, p.y * 137.0)).collect();
            let a = polygon_quality(&poly).unwrap();
            let b = polygon_quality(&scaled).unwrap();
            for (x, y) in a.components.iter().zip(&b.components) {
                assert_relative_eq!(x, y, epsilon = 1e-11);
            }
            assert_relative_eq!(a.element, b.element, epsilon = 1e-11);
        }
    }
}
