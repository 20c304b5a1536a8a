use std::collections::HashMap;

use nalgebra::{Point2, Point3};

use super::{dist2, ElementMeasures};
use crate::{Error, Result};

/// Indexed polygonal mesh on a planar domain.
///
/// Faces are simple, positively oriented vertex cycles; edges are derived
/// unique vertex pairs with face incidence and boundary flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2 {
    pub vertices: Vec<Point2<f64>>,
    pub faces: Vec<Vec<usize>>,
    /// Unique edges as (min, max) vertex pairs, in first-appearance order.
    pub edges: Vec<[usize; 2]>,
    /// Faces incident to each edge (1 on the boundary, 2 in the interior).
    pub edge_faces: Vec<Vec<usize>>,
    /// Edge indices of each face, aligned with the face cycle.
    pub face_edges: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
}

impl Mesh2 {
    /// Builds a mesh from vertex coordinates and face cycles, deriving
    /// adjacency and boundary flags and verifying the mesh invariants.
    ///
    /// Negatively oriented cycles are reversed so that every face has
    /// positive signed area.
    pub fn build(vertices: Vec<Point2<f64>>, face_cycles: Vec<Vec<usize>>) -> Result<Self> {
        let nv = vertices.len();
        let mut faces = face_cycles;
        for (f, cycle) in faces.iter_mut().enumerate() {
            if cycle.len() < 3 {
                return Err(Error::NonSimpleFace { face: f });
            }
            for &v in cycle.iter() {
                if v >= nv {
                    return Err(Error::Parse(format!("face {f}: vertex index {v} out of range")));
                }
            }
            let mut sorted = cycle.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NonSimpleFace { face: f });
            }
            if signed_area(&vertices, cycle) < 0.0 {
                cycle.reverse();
            }
            if !is_simple_cycle(&vertices, cycle) {
                return Err(Error::NonSimpleFace { face: f });
            }
        }

        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_faces: Vec<Vec<usize>> = Vec::new();
        let mut face_edges: Vec<Vec<usize>> = Vec::with_capacity(faces.len());
        for (f, cycle) in faces.iter().enumerate() {
            let mut fe = Vec::with_capacity(cycle.len());
            for i in 0..cycle.len() {
                let a = cycle[i];
                let b = cycle[(i + 1) % cycle.len()];
                let key = [a.min(b), a.max(b)];
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_faces.push(Vec::new());
                    edges.len() - 1
                });
                if edge_faces[id].len() == 2 {
                    return Err(Error::NonManifoldEdge { a: key[0], b: key[1] });
                }
                edge_faces[id].push(f);
                fe.push(id);
            }
            face_edges.push(fe);
        }

        let boundary_edge: Vec<bool> = edge_faces.iter().map(|fs| fs.len() == 1).collect();
        let mut boundary_vertex = vec![false; nv];
        let mut used = vec![false; nv];
        for (e, &[a, b]) in edges.iter().enumerate() {
            used[a] = true;
            used[b] = true;
            if boundary_edge[e] {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::DanglingVertex { vertex: v });
        }

        Ok(Self {
            vertices,
            faces,
            edges,
            edge_faces,
            face_edges,
            boundary_vertex,
            boundary_edge,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.boundary_edge.iter().filter(|&&b| !b).count()
    }

    /// Coordinates of a face cycle, in order.
    pub fn face_polygon(&self, face: usize) -> Vec<Point2<f64>> {
        self.faces[face].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn measures(&self, face: usize) -> Result<ElementMeasures> {
        let poly = self.face_polygon(face);
        let area = signed_area(&self.vertices, &self.faces[face]);
        let n = poly.len();
        let mut diameter = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                diameter = diameter.max(dist2(&poly[i], &poly[j]));
            }
        }
        if area <= crate::config::DEGENERACY_TOL * diameter * diameter {
            return Err(Error::DegenerateElement { element: face });
        }
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            let w = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        let centroid = Point3::new(cx / (6.0 * area), cy / (6.0 * area), 0.0);
        let edge_lengths = (0..n).map(|i| dist2(&poly[i], &poly[(i + 1) % n])).collect();
        Ok(ElementMeasures {
            size: area,
            centroid,
            diameter,
            edge_lengths,
            face_diameters: Vec::new(),
        })
    }

    /// O(n^2) sampled non-overlap check, intended for debug validation of
    /// small meshes only. Returns the first pair of faces whose interiors
    /// intersect at a sample point.
    pub fn debug_check_overlap(&self, samples_per_face: usize) -> Option<(usize, usize)> {
        let mut rng = crate::rng::SplitMix64::new(0x6f76656c);
        for f in 0..self.num_faces() {
            let poly = self.face_polygon(f);
            let m = self.measures(f).ok()?;
            let mut taken = 0;
            let mut tries = 0;
            while taken < samples_per_face && tries < samples_per_face * 100 {
                tries += 1;
                let x = rng.uniform(m.centroid.x - m.diameter, m.centroid.x + m.diameter);
                let y = rng.uniform(m.centroid.y - m.diameter, m.centroid.y + m.diameter);
                let p = Point2::new(x, y);
                if !point_strictly_inside(&poly, &p) {
                    continue;
                }
                taken += 1;
                for g in 0..self.num_faces() {
                    if g != f && point_strictly_inside(&self.face_polygon(g), &p) {
                        return Some((f.min(g), f.max(g)));
                    }
                }
            }
        }
        None
    }
}

/// Shoelace signed area of a vertex cycle.
pub fn signed_area(vertices: &[Point2<f64>], cycle: &[usize]) -> f64 {
    let n = cycle.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = vertices[cycle[i]];
        let q = vertices[cycle[(i + 1) % n]];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

/// Checks that no two non-adjacent edges of the cycle intersect and that
/// adjacent edges meet only at their shared endpoint.
fn is_simple_cycle(vertices: &[Point2<f64>], cycle: &[usize]) -> bool {
    let n = cycle.len();
    let pt = |i: usize| vertices[cycle[i % n]];
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (pt(i), pt(i + 1));
            let (c, d) = (pt(j), pt(j + 1));
            if adjacent {
                // Shared endpoint only; overlapping collinear neighbors are
                // rejected by the distinct-vertex check plus this test.
                continue;
            }
            if segments_intersect(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    true
}

fn orient(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: &Point2<f64>, b: &Point2<f64>, p: &Point2<f64>) -> bool {
    orient(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>, d: &Point2<f64>) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

pub(crate) fn point_strictly_inside(poly: &[Point2<f64>], p: &Point2<f64>) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if on_segment(&a, &b, p) {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> Mesh2 {
        Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn square_split_in_two_triangles() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.num_faces(), 2);
        assert_eq!(m.num_interior_edges(), 1);
    }

    #[test]
    fn single_square_all_boundary() {
        let m = unit_square();
        assert_eq!(m.num_edges(), 4);
        assert!(m.boundary_edge.iter().all(|&b| b));
        assert_eq!(m.num_interior_edges(), 0);
    }

    #[test]
    fn duplicate_vertex_in_cycle_is_rejected() {
        let r = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
            ],
            vec![vec![0, 1, 1, 2]],
        );
        assert!(matches!(r, Err(Error::NonSimpleFace { face: 0 })));
    }

    #[test]
    fn self_intersecting_cycle_is_rejected() {
        // Bowtie.
        let r = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2, 3]],
        );
        assert!(matches!(r, Err(Error::NonSimpleFace { .. })));
    }

    #[test]
    fn nonmanifold_edge_is_rejected() {
        let r = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.5, 1.0),
                Point2::new(0.5, -1.0),
                Point2::new(2.0, 0.5),
            ],
            vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 1, 4]],
        );
        assert!(matches!(r, Err(Error::NonManifoldEdge { .. })));
    }

    #[test]
    fn dangling_vertex_is_rejected() {
        let r = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
                Point2::new(5.0, 5.0),
            ],
            vec![vec![0, 1, 2]],
        );
        assert!(matches!(r, Err(Error::DanglingVertex { vertex: 3 })));
    }

    #[test]
    fn unit_square_measures() {
        let m = unit_square();
        let em = m.measures(0).unwrap();
        assert_relative_eq!(em.size, 1.0);
        assert_relative_eq!(em.centroid.x, 0.5);
        assert_relative_eq!(em.centroid.y, 0.5);
        assert_relative_eq!(em.diameter, 2.0f64.sqrt());
    }

    #[test]
    fn equilateral_triangle_measures() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.5, 3.0f64.sqrt() / 2.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let em = m.measures(0).unwrap();
        assert_relative_eq!(em.size, 3.0f64.sqrt() / 4.0, epsilon = 1e-14);
        assert_relative_eq!(em.diameter, 1.0);
    }

    #[test]
    fn cw_cycle_is_reoriented() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 2, 1]],
        )
        .unwrap();
        assert!(signed_area(&m.vertices, &m.faces[0]) > 0.0);
    }

    #[test]
    fn two_triangles_no_overlap() {
        let m = Mesh2::build(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        assert_eq!(m.debug_check_overlap(20), None);
    }
}
