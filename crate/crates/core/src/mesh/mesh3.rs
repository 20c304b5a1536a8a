use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::{dist3, ElementMeasures};
use crate::{Error, Result};

/// Indexed polyhedral mesh.
///
/// Faces are stored once; each cell references its faces together with an
/// orientation sign (`true` keeps the stored cycle, `false` reverses it) so
/// that every cell boundary is consistently outward-oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh3 {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<Vec<usize>>,
    pub cells: Vec<Vec<(usize, bool)>>,
    /// Cells incident to each face (1 on the boundary, 2 in the interior).
    pub face_cells: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_face: Vec<bool>,
}

impl Mesh3 {
    /// Builds a mesh from vertices, face cycles and per-cell face lists.
    ///
    /// Orientation signs are resolved per cell by propagating edge
    /// compatibility (two faces of a cell must traverse a shared edge in
    /// opposite directions) and flipping the whole cell if its divergence
    /// volume comes out negative.
    pub fn build(
        vertices: Vec<Point3<f64>>,
        face_cycles: Vec<Vec<usize>>,
        cell_face_lists: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (f, cycle) in face_cycles.iter().enumerate() {
            if cycle.len() < 3 {
                return Err(Error::NonSimpleFace { face: f });
            }
            for &v in cycle {
                if v >= nv {
                    return Err(Error::Parse(format!("face {f}: vertex index {v} out of range")));
                }
            }
            let mut sorted = cycle.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NonSimpleFace { face: f });
            }
        }
        for (c, fl) in cell_face_lists.iter().enumerate() {
            for &f in fl {
                if f >= face_cycles.len() {
                    return Err(Error::Parse(format!("cell {c}: face index {f} out of range")));
                }
            }
        }

        let mut cells = Vec::with_capacity(cell_face_lists.len());
        for (c, fl) in cell_face_lists.iter().enumerate() {
            let signs = resolve_cell_orientation(&vertices, &face_cycles, fl, c)?;
            cells.push(fl.iter().copied().zip(signs).collect::<Vec<_>>());
        }

        let mut face_cells = vec![Vec::new(); face_cycles.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &(f, _) in cell {
                if face_cells[f].len() == 2 {
                    return Err(Error::NonManifoldCellBoundary { cell: c });
                }
                face_cells[f].push(c);
            }
        }

        let boundary_face: Vec<bool> = face_cells.iter().map(|cs| cs.len() == 1).collect();
        let mut boundary_vertex = vec![false; nv];
        let mut used = vec![false; nv];
        for (f, cycle) in face_cycles.iter().enumerate() {
            for &v in cycle {
                used[v] = true;
                if boundary_face[f] {
                    boundary_vertex[v] = true;
                }
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::DanglingVertex { vertex: v });
        }

        Ok(Self {
            vertices,
            faces: face_cycles,
            cells,
            face_cells,
            boundary_vertex,
            boundary_face,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.boundary_face.iter().filter(|&&b| !b).count()
    }

    /// Unique undirected edges of the whole mesh, in first-appearance order.
    pub fn collect_edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut edges = Vec::new();
        for cycle in &self.faces {
            for i in 0..cycle.len() {
                let a = cycle[i];
                let b = cycle[(i + 1) % cycle.len()];
                let key = [a.min(b), a.max(b)];
                seen.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
        }
        edges
    }

    /// Face cycle of cell `c` at local position `i`, in outward order.
    pub fn oriented_face(&self, cell: usize, i: usize) -> Vec<usize> {
        let (f, sign) = self.cells[cell][i];
        let mut cycle = self.faces[f].clone();
        if !sign {
            cycle.reverse();
        }
        cycle
    }

    /// Distinct vertices of a cell, sorted.
    pub fn cell_vertices(&self, cell: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.cells[cell]
            .iter()
            .flat_map(|&(f, _)| self.faces[f].iter().copied())
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn measures(&self, cell: usize) -> Result<ElementMeasures> {
        let mut volume = 0.0;
        let mut ctr = Vector3::zeros();
        for i in 0..self.cells[cell].len() {
            let cycle = self.oriented_face(cell, i);
            let p0 = self.vertices[cycle[0]].coords;
            for t in 1..cycle.len() - 1 {
                let p1 = self.vertices[cycle[t]].coords;
                let p2 = self.vertices[cycle[t + 1]].coords;
                let v = p0.dot(&p1.cross(&p2)) / 6.0;
                volume += v;
                ctr += v * (p0 + p1 + p2) / 4.0;
            }
        }
        let vs = self.cell_vertices(cell);
        let mut diameter = 0.0f64;
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                diameter = diameter.max(dist3(&self.vertices[vs[i]], &self.vertices[vs[j]]));
            }
        }
        if volume <= crate::config::DEGENERACY_TOL * diameter.powi(3) {
            return Err(Error::DegenerateElement { element: cell });
        }
        let face_diameters = self.cells[cell]
            .iter()
            .map(|&(f, _)| {
                let cyc = &self.faces[f];
                let mut d = 0.0f64;
                for i in 0..cyc.len() {
                    for j in (i + 1)..cyc.len() {
                        d = d.max(dist3(&self.vertices[cyc[i]], &self.vertices[cyc[j]]));
                    }
                }
                d
            })
            .collect();
        Ok(ElementMeasures {
            size: volume,
            centroid: Point3::from(ctr / volume),
            diameter,
            edge_lengths: Vec::new(),
            face_diameters,
        })
    }
}

/// Resolves outward orientation signs for the faces of one cell.
fn resolve_cell_orientation(
    vertices: &[Point3<f64>],
    faces: &[Vec<usize>],
    cell_faces: &[usize],
    cell: usize,
) -> Result<Vec<bool>> {
    let nf = cell_faces.len();
    if nf < 4 {
        return Err(Error::OpenCell { cell });
    }
    // Undirected edge -> (local face, traversed as (a,b) in stored order?).
    let mut edge_uses: HashMap<[usize; 2], Vec<(usize, bool)>> = HashMap::new();
    for (lf, &f) in cell_faces.iter().enumerate() {
        let cycle = &faces[f];
        for i in 0..cycle.len() {
            let a = cycle[i];
            let b = cycle[(i + 1) % cycle.len()];
            let key = [a.min(b), a.max(b)];
            edge_uses.entry(key).or_default().push((lf, a < b));
        }
    }
    for uses in edge_uses.values() {
        if uses.len() != 2 {
            return Err(Error::OpenCell { cell });
        }
    }

    // Propagate: adjacent faces must traverse their shared edge oppositely.
    let mut sign: Vec<Option<bool>> = vec![None; nf];
    sign[0] = Some(true);
    let mut stack = vec![0usize];
    let mut adjacency: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nf];
    for uses in edge_uses.values() {
        let (fa, da) = uses[0];
        let (fb, db) = uses[1];
        // same_sign = the two faces need equal signs iff their stored
        // traversals already disagree on this edge.
        let same_sign = da != db;
        adjacency[fa].push((fb, same_sign));
        adjacency[fb].push((fa, same_sign));
    }
    while let Some(lf) = stack.pop() {
        let s = sign[lf].unwrap();
        for &(lg, same) in &adjacency[lf] {
            let want = if same { s } else { !s };
            match sign[lg] {
                None => {
                    sign[lg] = Some(want);
                    stack.push(lg);
                }
                Some(have) if have != want => {
                    return Err(Error::NonManifoldCellBoundary { cell });
                }
                _ => {}
            }
        }
    }
    if sign.iter().any(|s| s.is_none()) {
        // Boundary split into several components.
        return Err(Error::NonManifoldCellBoundary { cell });
    }
    let mut signs: Vec<bool> = sign.into_iter().map(|s| s.unwrap()).collect();

    let volume = |signs: &[bool]| -> f64 {
        let mut v = 0.0;
        for (lf, &f) in cell_faces.iter().enumerate() {
            let mut cycle = faces[f].clone();
            if !signs[lf] {
                cycle.reverse();
            }
            let p0 = vertices[cycle[0]].coords;
            for t in 1..cycle.len() - 1 {
                v += p0.dot(&vertices[cycle[t]].coords.cross(&vertices[cycle[t + 1]].coords)) / 6.0;
            }
        }
        v
    };
    let mut vol = volume(&signs);
    if vol < 0.0 {
        for s in signs.iter_mut() {
            *s = !*s;
        }
        vol = -vol;
    }
    if vol <= 0.0 {
        return Err(Error::InvertedCell { cell });
    }
    Ok(signs)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Unit cube: 8 vertices, 6 quad faces, 1 cell.
    pub fn unit_cube() -> Mesh3 {
        let vertices = cube_vertices(0.0);
        let faces = cube_faces(0);
        Mesh3::build(vertices, faces, vec![vec![0, 1, 2, 3, 4, 5]]).unwrap()
    }

    pub fn cube_vertices(z0: f64) -> Vec<Point3<f64>> {
        let mut v = Vec::new();
        for k in 0..2 {
            for j in 0..2 {
                for i in 0..2 {
                    v.push(Point3::new(i as f64, j as f64, z0 + k as f64));
                }
            }
        }
        v
    }

    pub fn cube_faces(off: usize) -> Vec<Vec<usize>> {
        // Vertex order: (i, j, k) -> i + 2j + 4k.
        [
            vec![0, 1, 3, 2], // bottom
            vec![4, 6, 7, 5], // top
            vec![0, 4, 5, 1], // front (y=0)
            vec![2, 3, 7, 6], // back
            vec![0, 2, 6, 4], // left (x=0)
            vec![1, 5, 7, 3], // right
        ]
        .into_iter()
        .map(|c| c.into_iter().map(|v| v + off).collect())
        .collect()
    }

    #[test]
    fn unit_cube_builds_with_volume_one() {
        let m = unit_cube();
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_faces(), 6);
        assert_eq!(m.num_cells(), 1);
        let em = m.measures(0).unwrap();
        assert_relative_eq!(em.size, 1.0);
        assert_relative_eq!(em.centroid.x, 0.5);
        assert_relative_eq!(em.centroid.y, 0.5);
        assert_relative_eq!(em.centroid.z, 0.5);
        assert_relative_eq!(em.diameter, 3.0f64.sqrt());
    }

    /// Two unit cubes stacked in z, sharing a face.
    pub fn two_stacked_cubes() -> Mesh3 {
        let mut vertices = cube_vertices(0.0);
        vertices.extend_from_slice(&cube_vertices(1.0)[4..]); // z=2 layer
        let mut faces = cube_faces(0);
        // Upper cube uses vertices 4..12 (z=1 layer is shared).
        let upper: Vec<Vec<usize>> = cube_faces(4)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != 0) // its bottom is the lower cube's top
            .map(|(_, c)| c)
            .collect();
        faces.extend(upper);
        let cells = vec![vec![0, 1, 2, 3, 4, 5], vec![1, 6, 7, 8, 9, 10]];
        Mesh3::build(vertices, faces, cells).unwrap()
    }

    #[test]
    fn two_cubes_share_one_interior_face() {
        let m = two_stacked_cubes();
        assert_eq!(m.num_faces(), 11);
        assert_eq!(m.num_interior_faces(), 1);
        assert_relative_eq!(m.measures(0).unwrap().size, 1.0);
        assert_relative_eq!(m.measures(1).unwrap().size, 1.0);
    }

    #[test]
    fn open_cell_is_rejected() {
        let vertices = cube_vertices(0.0);
        let faces = cube_faces(0);
        let r = Mesh3::build(vertices, faces, vec![vec![0, 1, 2, 3, 4]]);
        assert!(matches!(r, Err(Error::OpenCell { cell: 0 })));
    }

    #[test]
    fn orientation_signs_make_both_cells_positive() {
        let m = two_stacked_cubes();
        // The shared face must carry opposite signs in the two cells.
        let shared = 1usize;
        let s0 = m.cells[0].iter().find(|&&(f, _)| f == shared).unwrap().1;
        let s1 = m.cells[1].iter().find(|&&(f, _)| f == shared).unwrap().1;
        assert_ne!(s0, s1);
    }
}
