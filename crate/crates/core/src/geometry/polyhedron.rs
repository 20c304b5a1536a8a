use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::KernelRegion;
use crate::config::KERNEL_SLIVER_FRACTION;

/// Convex polytope as an outward-oriented face/vertex structure, used as the
/// running region of half-space intersection.
#[derive(Debug, Clone)]
pub struct ConvexPolytope {
    pub vertices: Vec<Point3<f64>>,
    /// Vertex-index cycles, outward-oriented.
    pub faces: Vec<Vec<usize>>,
}

impl ConvexPolytope {
    pub fn bounding_box(lo: Point3<f64>, hi: Point3<f64>) -> Self {
        let v = |i: usize, j: usize, k: usize| {
            Point3::new(
                if i == 0 { lo.x } else { hi.x },
                if j == 0 { lo.y } else { hi.y },
                if k == 0 { lo.z } else { hi.z },
            )
        };
        // Index (i, j, k) -> i + 2j + 4k, faces outward.
        let vertices = vec![
            v(0, 0, 0),
            v(1, 0, 0),
            v(0, 1, 0),
            v(1, 1, 0),
            v(0, 0, 1),
            v(1, 0, 1),
            v(0, 1, 1),
            v(1, 1, 1),
        ];
        let faces = vec![
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
        ];
        Self { vertices, faces }
    }

    pub fn volume(&self) -> f64 {
        let mut v = 0.0;
        for cycle in &self.faces {
            let p0 = self.vertices[cycle[0]].coords;
            for t in 1..cycle.len() - 1 {
                v += p0
                    .dot(&self.vertices[cycle[t]].coords.cross(&self.vertices[cycle[t + 1]].coords))
                    / 6.0;
            }
        }
        v
    }

    /// Clips by the half-space `{x : n.x <= d}`. Returns `None` when the
    /// intersection is empty (fewer than 4 surviving faces).
    pub fn clip(&self, n: &Vector3<f64>, d: f64, eps: f64) -> Option<Self> {
        let dist: Vec<f64> = self.vertices.iter().map(|p| n.dot(&p.coords) - d).collect();
        if dist.iter().all(|&s| s <= eps) {
            return Some(self.clone());
        }
        if dist.iter().all(|&s| s >= -eps) {
            return None;
        }

        let mut new_vertices: Vec<Point3<f64>> = Vec::new();
        let mut kept: HashMap<usize, usize> = HashMap::new();
        let mut cut: HashMap<[usize; 2], usize> = HashMap::new();
        let mut keep_vertex = |v: usize, verts: &mut Vec<Point3<f64>>, old: &[Point3<f64>]| {
            *kept.entry(v).or_insert_with(|| {
                verts.push(old[v]);
                verts.len() - 1
            })
        };
        let mut cut_edge = |a: usize, b: usize, verts: &mut Vec<Point3<f64>>, old: &[Point3<f64>]| {
            let key = [a.min(b), a.max(b)];
            *cut.entry(key).or_insert_with(|| {
                // Interpolate in a fixed endpoint order so both incident
                // faces produce bit-identical cut points.
                let (p, q, sp, sq) = (old[key[0]], old[key[1]], dist[key[0]], dist[key[1]]);
                let t = sp / (sp - sq);
                verts.push(Point3::from(p.coords + t * (q.coords - p.coords)));
                verts.len() - 1
            })
        };

        let mut new_faces: Vec<Vec<usize>> = Vec::new();
        let mut section: Vec<usize> = Vec::new();
        for cycle in &self.faces {
            let m = cycle.len();
            let mut out = Vec::new();
            for i in 0..m {
                let a = cycle[i];
                let b = cycle[(i + 1) % m];
                if dist[a] <= eps {
                    out.push(keep_vertex(a, &mut new_vertices, &self.vertices));
                }
                if (dist[a] < -eps && dist[b] > eps) || (dist[a] > eps && dist[b] < -eps) {
                    out.push(cut_edge(a, b, &mut new_vertices, &self.vertices));
                }
            }
            out.dedup();
            if out.len() > 1 && out[0] == *out.last().unwrap() {
                out.pop();
            }
            if out.len() >= 3 {
                new_faces.push(out);
            }
        }
        section.extend(cut.values().copied());
        if section.len() >= 3 {
            // The section of a convex body is a convex polygon: order its
            // vertices angularly around the section centroid in the plane.
            let c = section.iter().fold(Vector3::zeros(), |acc, &v| acc + new_vertices[v].coords)
                / section.len() as f64;
            let u = {
                let mut u = n.cross(&Vector3::x());
                if u.norm() < 1e-9 {
                    u = n.cross(&Vector3::y());
                }
                u.normalize()
            };
            let w = n.cross(&u).normalize();
            section.sort_by(|&a, &b| {
                let pa = new_vertices[a].coords - c;
                let pb = new_vertices[b].coords - c;
                let ta = pa.dot(&w).atan2(pa.dot(&u));
                let tb = pb.dot(&w).atan2(pb.dot(&u));
                ta.partial_cmp(&tb).unwrap()
            });
            // Orient so the section's outward normal is n.
            let newell = newell_normal(&section, &new_vertices);
            if newell.dot(n) < 0.0 {
                section.reverse();
            }
            new_faces.push(section);
        }
        if new_faces.len() < 4 {
            return None;
        }
        Some(Self { vertices: new_vertices, faces: new_faces })
    }
}

fn newell_normal(cycle: &[usize], vertices: &[Point3<f64>]) -> Vector3<f64> {
    let mut nrm = Vector3::zeros();
    for i in 0..cycle.len() {
        let p = vertices[cycle[i]].coords;
        let q = vertices[cycle[(i + 1) % cycle.len()]].coords;
        nrm += p.cross(&q);
    }
    nrm
}

/// Kernel of a polyhedron given by outward-oriented face cycles.
///
/// Every boundary face is triangulated by a fan from its centroid and each
/// triangle contributes one half-space, so mildly non-planar agglomerated
/// faces are handled. `volume` is the (positive) element volume used for
/// the sliver cutoff.
pub fn polyhedron_kernel(
    vertices: &[Point3<f64>],
    faces: &[Vec<usize>],
    volume: f64,
    diameter: f64,
) -> KernelRegion {
    let (mut lo, mut hi) = (vertices[faces[0][0]], vertices[faces[0][0]]);
    for cycle in faces {
        for &v in cycle {
            let p = vertices[v];
            lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
    }
    let pad = 1e-9 * (diameter + 1.0);
    let padv = Vector3::new(pad, pad, pad);
    let mut region = ConvexPolytope::bounding_box(lo - padv, hi + padv);
    let eps = 1e-12 * diameter.max(1e-300);

    for cycle in faces {
        let c = cycle.iter().fold(Vector3::zeros(), |acc, &v| acc + vertices[v].coords)
            / cycle.len() as f64;
        for i in 0..cycle.len() {
            let p = vertices[cycle[i]].coords;
            let q = vertices[cycle[(i + 1) % cycle.len()]].coords;
            let n = (p - c).cross(&(q - c));
            if n.norm() <= 1e-14 * diameter * diameter {
                continue; // degenerate fan triangle (collinear with centroid)
            }
            match region.clip(&n, n.dot(&c), eps) {
                Some(r) => region = r,
                None => return KernelRegion::empty(3),
            }
        }
    }
    let measure = region.volume();
    if measure < KERNEL_SLIVER_FRACTION * volume {
        return KernelRegion::empty(3);
    }
    KernelRegion { dim: 3, vertices: region.vertices, measure }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube(scale: f64) -> (Vec<Point3<f64>>, Vec<Vec<usize>>) {
        let b = ConvexPolytope::bounding_box(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(scale, scale, scale),
        );
        (b.vertices, b.faces)
    }

    #[test]
    fn bounding_box_volume() {
        let b = ConvexPolytope::bounding_box(Point3::new(0.0, 0.0, 0.0), Point3::new(2.0, 1.0, 3.0));
        assert_relative_eq!(b.volume(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn clip_cube_in_half() {
        let b = cube(1.0);
        let poly = ConvexPolytope { vertices: b.0, faces: b.1 };
        let half = poly.clip(&Vector3::x(), 0.5, 1e-12).unwrap();
        assert_relative_eq!(half.volume(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn kernel_of_cube_is_cube() {
        let (v, f) = cube(1.0);
        let k = polyhedron_kernel(&v, &f, 1.0, 3.0f64.sqrt());
        assert_relative_eq!(k.measure, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn corner_cut_keeps_seven_eighths() {
        let (v, f) = cube(1.0);
        let poly = ConvexPolytope { vertices: v, faces: f };
        // Cut the corner at the origin with x + y + z <= ... keep far side.
        let n = Vector3::new(-1.0, -1.0, -1.0);
        let cutoff = -0.5;
        let cut = poly.clip(&n, cutoff, 1e-12).unwrap();
        // Removed tetrahedron has volume (0.5)^3 / 6.
        assert_relative_eq!(cut.volume(), 1.0 - 0.125 / 6.0, epsilon = 1e-12);
    }
}
