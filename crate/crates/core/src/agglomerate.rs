//! Agglomeration of same-label elements into single polytopal cells, with
//! manifold safeguards, plus the full optimization pipeline.
//!
//! A merged element is bounded by exactly the interfaces shared by only one
//! element of its label class; interior interfaces are discarded. Classes
//! whose union would be non-manifold are skipped, keeping the old elements.
//! The transform is purely topological: vertex positions never change.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dual::{build_dual_graph, WeightMode};
use crate::mesh::{Mesh, Mesh2, Mesh3};
use crate::partition::{compute_k, kway_partition, PartitionOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgglomerationReport {
    pub elements_before: usize,
    pub elements_after: usize,
    /// Interfaces (edges if 2D, faces if 3D) removed from the mesh.
    pub interfaces_removed: usize,
    pub vertices_removed: usize,
    /// Label classes kept un-merged because their union failed a check.
    pub labels_skipped: Vec<usize>,
    pub quality_before: f64,
    pub quality_after: f64,
    /// Wall time of the whole optimization (graph + partition + merge),
    /// seconds. Zero when only `agglomerate` was run.
    pub t_optimize: f64,
    /// Requested and achieved part counts when driven by `optimize`.
    pub k_requested: usize,
    pub k_actual: usize,
}

/// Union of a set of faces of a 2D mesh, as a vertex cycle bounded by the
/// edges used by exactly one face of the set.
pub fn merge_faces_2d(mesh: &Mesh2, set: &[usize]) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("empty element set".into()));
    }
    if set.len() == 1 {
        return Ok(mesh.faces[set[0]].clone());
    }
    check_connected(set, |f| {
        mesh.face_edges[f]
            .iter()
            .flat_map(|&e| mesh.edge_faces[e].iter().copied())
            .filter(move |&g| g != f)
    })?;

    let in_set: std::collections::HashSet<usize> = set.iter().copied().collect();
    let mut edge_count: HashMap<usize, usize> = HashMap::new();
    for &f in set {
        for &e in &mesh.face_edges[f] {
            *edge_count.entry(e).or_insert(0) += 1;
        }
    }
    let mut boundary: Vec<usize> = edge_count
        .iter()
        .filter(|&(&e, &c)| {
            c == 1 && !(mesh.edge_faces[e].len() == 2 && mesh.edge_faces[e].iter().all(|g| in_set.contains(g)))
        })
        .map(|(&e, _)| e)
        .collect();
    boundary.sort_unstable();
    walk_single_cycle(mesh, &boundary)
}

/// Orders boundary edges into one simple cycle; raises `NonManifoldUnion`
/// on pinched vertices or multiple cycles.
fn walk_single_cycle(mesh: &Mesh2, boundary: &[usize]) -> Result<Vec<usize>> {
    let mut nbrs: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in boundary {
        let [a, b] = mesh.edges[e];
        nbrs.entry(a).or_default().push(b);
        nbrs.entry(b).or_default().push(a);
    }
    if nbrs.values().any(|v| v.len() != 2) {
        return Err(Error::NonManifoldUnion);
    }
    let start = *nbrs.keys().min().ok_or(Error::NonManifoldUnion)?;
    let mut cycle = vec![start];
    let first = &nbrs[&start];
    let mut prev = start;
    let mut cur = first[0].min(first[1]);
    while cur != start {
        cycle.push(cur);
        let ns = &nbrs[&cur];
        let next = if ns[0] == prev { ns[1] } else { ns[0] };
        prev = cur;
        cur = next;
    }
    if cycle.len() != boundary.len() {
        return Err(Error::NonManifoldUnion);
    }
    Ok(cycle)
}

/// Union of a set of cells of a 3D mesh: the faces used by exactly one cell
/// of the set, with their outward signs, after a manifold check.
pub fn merge_cells_3d(mesh: &Mesh3, set: &[usize]) -> Result<Vec<(usize, bool)>> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("empty element set".into()));
    }
    if set.len() == 1 {
        return Ok(mesh.cells[set[0]].clone());
    }
    check_connected(set, |c| {
        mesh.cells[c]
            .iter()
            .flat_map(|&(f, _)| mesh.face_cells[f].iter().copied())
            .filter(move |&d| d != c)
    })?;

    let mut face_uses: HashMap<usize, Vec<bool>> = HashMap::new();
    for &c in set {
        for &(f, s) in &mesh.cells[c] {
            face_uses.entry(f).or_default().push(s);
        }
    }
    let mut kept: Vec<(usize, bool)> = face_uses
        .iter()
        .filter(|(_, uses)| uses.len() == 1)
        .map(|(&f, uses)| (f, uses[0]))
        .collect();
    kept.sort_unstable_by_key(|&(f, _)| f);
    let cycles: Vec<Vec<usize>> = kept
        .iter()
        .map(|&(f, s)| {
            let mut c = mesh.faces[f].clone();
            if !s {
                c.reverse();
            }
            c
        })
        .collect();
    if !is_manifold_boundary_3d(&cycles) {
        return Err(Error::NonManifoldUnion);
    }
    Ok(kept)
}

fn check_connected<I>(set: &[usize], neighbors: impl Fn(usize) -> I) -> Result<()>
where
    I: Iterator<Item = usize>,
{
    let in_set: HashMap<usize, usize> = set.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut seen = vec![false; set.len()];
    let mut stack = vec![set[0]];
    seen[0] = true;
    let mut count = 1;
    while let Some(e) = stack.pop() {
        for g in neighbors(e) {
            if let Some(&i) = in_set.get(&g) {
                if !seen[i] {
                    seen[i] = true;
                    count += 1;
                    stack.push(g);
                }
            }
        }
    }
    if count != set.len() {
        return Err(Error::DisconnectedUnion);
    }
    Ok(())
}

/// 2D manifold test: the candidate's boundary edges form one simple cycle.
pub fn is_manifold_2d(mesh: &Mesh2, boundary_edges: &[usize]) -> bool {
    walk_single_cycle(mesh, boundary_edges).is_ok()
}

/// 3D manifold test on outward-oriented boundary face cycles: every edge is
/// used by exactly two faces with opposite directions, the faces around
/// every vertex form a single cycle, and the boundary is connected.
pub fn is_manifold_boundary_3d(cycles: &[Vec<usize>]) -> bool {
    let mut edge_uses: HashMap<[usize; 2], Vec<(usize, bool)>> = HashMap::new();
    for (fi, cycle) in cycles.iter().enumerate() {
        for i in 0..cycle.len() {
            let a = cycle[i];
            let b = cycle[(i + 1) % cycle.len()];
            edge_uses.entry([a.min(b), a.max(b)]).or_default().push((fi, a < b));
        }
    }
    for uses in edge_uses.values() {
        if uses.len() != 2 || uses[0].1 == uses[1].1 {
            return false;
        }
    }

    // Face adjacency, for both the vertex-link and connectivity checks.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); cycles.len()];
    let mut vertex_links: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (edge, uses) in &edge_uses {
        let (fa, fb) = (uses[0].0, uses[1].0);
        adjacency[fa].push(fb);
        adjacency[fb].push(fa);
        for &v in edge {
            vertex_links.entry(v).or_default().push((fa, fb));
        }
    }

    // Single connected component.
    let mut seen = vec![false; cycles.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(f) = stack.pop() {
        for &g in &adjacency[f] {
            if !seen[g] {
                seen[g] = true;
                count += 1;
                stack.push(g);
            }
        }
    }
    if count != cycles.len() {
        return false;
    }

    // The faces incident to each vertex must form a single cycle: the local
    // face graph (faces joined by edges through the vertex) is 2-regular and
    // connected.
    for (_, links) in vertex_links {
        let mut local: HashMap<usize, Vec<usize>> = HashMap::new();
        for (fa, fb) in &links {
            local.entry(*fa).or_default().push(*fb);
            local.entry(*fb).or_default().push(*fa);
        }
        if local.values().any(|n| n.len() != 2) {
            return false;
        }
        let start = *local.keys().min().unwrap();
        let mut visited = std::collections::HashSet::new();
        visited.insert(start);
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            for &g in &local[&f] {
                if visited.insert(g) {
                    stack.push(g);
                }
            }
        }
        if visited.len() != local.len() {
            return false;
        }
    }
    true
}

/// Merges every label class of the mesh. Classes are processed in
/// increasing label order; face-disconnected classes are split into
/// connected components first; classes whose union fails the manifold check
/// are kept as-is and recorded in the report.
pub fn agglomerate(mesh: &Mesh, labels: &[usize]) -> Result<(Mesh, AgglomerationReport)> {
    let n = mesh.num_elements();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!(
            "labels length {} does not match element count {n}",
            labels.len()
        )));
    }
    let quality_before = crate::quality::mesh_quality(mesh)?;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    {
        let mut by_label: HashMap<usize, Vec<usize>> = HashMap::new();
        for (e, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(e);
        }
        let mut keys: Vec<usize> = by_label.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            classes.push(by_label.remove(&k).unwrap());
        }
    }

    let (mesh_after, skipped) = match mesh {
        Mesh::Two(m) => {
            let (m2, sk) = agglomerate_2d(m, &classes)?;
            (Mesh::Two(m2), sk)
        }
        Mesh::Three(m) => {
            let (m3, sk) = agglomerate_3d(m, &classes)?;
            (Mesh::Three(m3), sk)
        }
    };
    let quality_after = crate::quality::mesh_quality(&mesh_after)?;
    let report = AgglomerationReport {
        elements_before: n,
        elements_after: mesh_after.num_elements(),
        interfaces_removed: interface_count(mesh) - interface_count(&mesh_after),
        vertices_removed: vertex_count(mesh) - vertex_count(&mesh_after),
        labels_skipped: skipped,
        quality_before,
        quality_after,
        t_optimize: 0.0,
        k_requested: 0,
        k_actual: 0,
    };
    Ok((mesh_after, report))
}

fn interface_count(mesh: &Mesh) -> usize {
    match mesh {
        Mesh::Two(m) => m.num_edges(),
        Mesh::Three(m) => m.num_faces(),
    }
}

fn vertex_count(mesh: &Mesh) -> usize {
    match mesh {
        Mesh::Two(m) => m.num_vertices(),
        Mesh::Three(m) => m.num_vertices(),
    }
}

/// Splits a class into interface-connected components (2D edges / 3D faces).
fn connected_components<I>(class: &[usize], neighbors: impl Fn(usize) -> I) -> Vec<Vec<usize>>
where
    I: Iterator<Item = usize>,
{
    let in_class: HashMap<usize, usize> =
        class.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut comp = vec![usize::MAX; class.len()];
    let mut components = Vec::new();
    for i in 0..class.len() {
        if comp[i] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![class[i]];
        comp[i] = id;
        let mut stack = vec![class[i]];
        while let Some(e) = stack.pop() {
            for g in neighbors(e) {
                if let Some(&j) = in_class.get(&g) {
                    if comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(class[j]);
                        stack.push(g);
                    }
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

fn agglomerate_2d(mesh: &Mesh2, classes: &[Vec<usize>]) -> Result<(Mesh2, Vec<usize>)> {
    let mut new_faces: Vec<Vec<usize>> = Vec::new();
    let mut skipped = Vec::new();
    for (label, class) in classes.iter().enumerate() {
        let comps = connected_components(class, |f| {
            mesh.face_edges[f]
                .iter()
                .flat_map(|&e| mesh.edge_faces[e].iter().copied())
                .filter(move |&g| g != f)
        });
        for comp in comps {
            if comp.len() == 1 {
                new_faces.push(mesh.faces[comp[0]].clone());
                continue;
            }
            match merge_faces_2d(mesh, &comp) {
                Ok(cycle) => new_faces.push(cycle),
                Err(Error::NonManifoldUnion) | Err(Error::DisconnectedUnion) => {
                    skipped.push(label);
                    for &f in &comp {
                        new_faces.push(mesh.faces[f].clone());
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    // Drop unused vertices, keeping the surviving coordinates bit-identical.
    let mut used = vec![false; mesh.num_vertices()];
    for cycle in &new_faces {
        for &v in cycle {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; mesh.num_vertices()];
    let mut vertices = Vec::new();
    for (v, &u) in used.iter().enumerate() {
        if u {
            remap[v] = vertices.len();
            vertices.push(mesh.vertices[v]);
        }
    }
    for cycle in new_faces.iter_mut() {
        for v in cycle.iter_mut() {
            *v = remap[*v];
        }
    }
    Ok((Mesh2::build(vertices, new_faces)?, skipped))
}

fn agglomerate_3d(mesh: &Mesh3, classes: &[Vec<usize>]) -> Result<(Mesh3, Vec<usize>)> {
    let mut new_cells: Vec<Vec<usize>> = Vec::new();
    let mut skipped = Vec::new();
    for (label, class) in classes.iter().enumerate() {
        let comps = connected_components(class, |c| {
            mesh.cells[c]
                .iter()
                .flat_map(|&(f, _)| mesh.face_cells[f].iter().copied())
                .filter(move |&d| d != c)
        });
        for comp in comps {
            if comp.len() == 1 {
                new_cells.push(mesh.cells[comp[0]].iter().map(|&(f, _)| f).collect());
                continue;
            }
            match merge_cells_3d(mesh, &comp) {
                Ok(kept) => new_cells.push(kept.into_iter().map(|(f, _)| f).collect()),
                Err(Error::NonManifoldUnion) | Err(Error::DisconnectedUnion) => {
                    skipped.push(label);
                    for &c in &comp {
                        new_cells.push(mesh.cells[c].iter().map(|&(f, _)| f).collect());
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    // Compact faces, then vertices.
    let mut face_used = vec![false; mesh.num_faces()];
    for cell in &new_cells {
        for &f in cell {
            face_used[f] = true;
        }
    }
    let mut face_remap = vec![usize::MAX; mesh.num_faces()];
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for (f, &u) in face_used.iter().enumerate() {
        if u {
            face_remap[f] = faces.len();
            faces.push(mesh.faces[f].clone());
        }
    }
    for cell in new_cells.iter_mut() {
        for f in cell.iter_mut() {
            *f = face_remap[*f];
        }
    }
    let mut vert_used = vec![false; mesh.num_vertices()];
    for cycle in &faces {
        for &v in cycle {
            vert_used[v] = true;
        }
    }
    let mut vert_remap = vec![usize::MAX; mesh.num_vertices()];
    let mut vertices = Vec::new();
    for (v, &u) in vert_used.iter().enumerate() {
        if u {
            vert_remap[v] = vertices.len();
            vertices.push(mesh.vertices[v]);
        }
    }
    for cycle in faces.iter_mut() {
        for v in cycle.iter_mut() {
            *v = vert_remap[*v];
        }
    }
    Ok((Mesh3::build(vertices, faces, new_cells)?, skipped))
}

/// Full optimization pipeline: dual graph with quality weights, integer
/// rescaling, K from the optimization parameter `kappa` (a percentage of
/// the element count), K-way partitioning, agglomeration.
pub fn optimize(
    mesh: &Mesh,
    kappa: f64,
    seed: u64,
    weight_mode: WeightMode,
    config: &crate::config::Config,
) -> Result<(Mesh, AgglomerationReport)> {
    if !(kappa > 0.0 && kappa <= 100.0) {
        return Err(Error::InvalidArgument(format!("kappa {kappa} outside (0, 100]")));
    }
    let start = Instant::now();
    let graph = build_dual_graph(mesh, weight_mode, config)?;
    let k = compute_k(mesh.num_elements(), kappa);
    let options = PartitionOptions { imbalance_tol: config.imbalance_tol, ..Default::default() };
    let labels = kway_partition(&graph, k, seed, &options);
    let (mesh_after, mut report) = agglomerate(mesh, &labels.labels)?;
    report.t_optimize = start.elapsed().as_secs_f64();
    report.k_requested = k;
    report.k_actual = labels.k_actual;
    Ok((mesh_after, report))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use nalgebra::Point2;

    /// n x n grid of unit squares.
    pub fn square_grid(n: usize) -> Mesh2 {
        let mut vertices = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point2::new(i as f64, j as f64));
            }
        }
        let at = |i: usize, j: usize| j * (n + 1) + i;
        let mut faces = Vec::new();
        for j in 0..n {
            for i in 0..n {
                faces.push(vec![at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
        Mesh2::build(vertices, faces).unwrap()
    }

    #[test]
    fn two_squares_merge_into_rectangle_with_hanging_midpoints() {
        let m = square_grid(2);
        // Faces 0 and 1 are the bottom row.
        let cycle = merge_faces_2d(&m, &[0, 1]).unwrap();
        assert_eq!(cycle.len(), 6);
    }

    #[test]
    fn single_element_merge_is_identity() {
        let m = square_grid(2);
        assert_eq!(merge_faces_2d(&m, &[3]).unwrap(), m.faces[3]);
    }

    #[test]
    fn vertex_only_contact_is_rejected() {
        let m = square_grid(2);
        // Faces 0 and 3 share only the center vertex.
        assert!(matches!(merge_faces_2d(&m, &[0, 3]), Err(Error::DisconnectedUnion)));
    }

    #[test]
    fn ring_with_hole_is_non_manifold() {
        let m = square_grid(3);
        // All faces but the center: union is an annulus (two boundary cycles).
        let ring: Vec<usize> = (0..9).filter(|&f| f != 4).collect();
        assert!(matches!(merge_faces_2d(&m, &ring), Err(Error::NonManifoldUnion)));
    }

    #[test]
    fn grid_merges_into_single_square() {
        let m = square_grid(2);
        let mesh = Mesh::Two(m);
        let (out, report) = agglomerate(&mesh, &[0, 0, 0, 0]).unwrap();
        assert_eq!(report.elements_before, 4);
        assert_eq!(report.elements_after, 1);
        assert_eq!(report.interfaces_removed, 4);
        assert_eq!(report.vertices_removed, 1); // the interior vertex
        if let Mesh::Two(m2) = &out {
            assert_eq!(m2.faces[0].len(), 8); // hanging midpoints kept
        }
        assert!(report.interfaces_removed >= report.elements_before - report.elements_after);
    }

    #[test]
    fn distinct_labels_leave_mesh_unchanged() {
        let m = square_grid(2);
        let mesh = Mesh::Two(m.clone());
        let (out, report) = agglomerate(&mesh, &[0, 1, 2, 3]).unwrap();
        assert_eq!(report.elements_after, 4);
        assert_eq!(report.interfaces_removed, 0);
        if let Mesh::Two(m2) = &out {
            assert_eq!(m2.vertices, m.vertices);
        }
    }

    #[test]
    fn annular_class_is_skipped_others_merge() {
        let m = square_grid(3);
        let mesh = Mesh::Two(m);
        // Ring labeled 0, center labeled 1.
        let labels: Vec<usize> = (0..9).map(|f| if f == 4 { 1 } else { 0 }).collect();
        let (out, report) = agglomerate(&mesh, &labels).unwrap();
        assert_eq!(report.labels_skipped, vec![0]);
        assert_eq!(out.num_elements(), 9);
    }

    #[test]
    fn domain_measure_is_preserved() {
        let m = square_grid(3);
        let mesh = Mesh::Two(m);
        let labels = vec![0, 0, 1, 0, 1, 1, 2, 2, 2];
        let (out, _) = agglomerate(&mesh, &labels).unwrap();
        let before = mesh.total_measure();
        let after = out.total_measure();
        assert!((before - after).abs() <= 1e-10 * before);
    }

    #[test]
    fn merged_cubes_are_manifold() {
        let m = crate::mesh::mesh3::tests::two_stacked_cubes();
        let kept = merge_cells_3d(&m, &[0, 1]).unwrap();
        assert_eq!(kept.len(), 10);
        let mesh = Mesh::Three(m);
        let (out, report) = agglomerate(&mesh, &[0, 0]).unwrap();
        assert_eq!(out.num_elements(), 1);
        assert_eq!(report.interfaces_removed, 1);
        if let Mesh::Three(m3) = &out {
            assert!((m3.measures(0).unwrap().size - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pinched_vertex_union_is_rejected() {
        // Two cubes sharing exactly one vertex.
        use nalgebra::Point3;
        let mut vertices = crate::mesh::mesh3::tests::cube_vertices(0.0);
        let shift: Vec<Point3<f64>> = crate::mesh::mesh3::tests::cube_vertices(0.0)
            .iter()
            .map(|p| Point3::new(p.x + 1.0, p.y + 1.0, p.z + 1.0))
            .collect();
        // Vertex 7 of the first cube coincides with vertex 0 of the second.
        vertices.extend(shift.iter().skip(1));
        let mut faces = crate::mesh::mesh3::tests::cube_faces(0);
        let second: Vec<Vec<usize>> = crate::mesh::mesh3::tests::cube_faces(0)
            .into_iter()
            .map(|c| c.into_iter().map(|v| if v == 0 { 7 } else { v + 7 }).collect())
            .collect();
        faces.extend(second);
        let m = Mesh3::build(vertices, faces, vec![vec![0, 1, 2, 3, 4, 5], vec![6, 7, 8, 9, 10, 11]])
            .unwrap();
        // Not face-adjacent at all, so the union is disconnected.
        assert!(matches!(merge_cells_3d(&m, &[0, 1]), Err(Error::DisconnectedUnion)));
        // The manifold test itself rejects the pinched boundary.
        let cycles: Vec<Vec<usize>> = (0..2)
            .flat_map(|c| {
                let m = &m;
                (0..6).map(move |i| m.oriented_face(c, i))
            })
            .collect();
        assert!(!is_manifold_boundary_3d(&cycles));
    }
}
