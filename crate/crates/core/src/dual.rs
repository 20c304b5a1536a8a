//! Weighted dual graph of a mesh: one node per element, one arc per
//! interior interface (edge in 2D, face in 3D).
//!
//! Node weights are element qualities; an arc connecting two elements is
//! weighted with the quality of their pairwise union, so the partitioner is
//! rewarded for cutting interfaces whose merge would be poor and for keeping
//! interfaces whose merge would be good. A constant mode (all weights 1)
//! turns the objective into plain interface-count minimization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;
use crate::quality::{cell_quality, element_quality, polygon_quality};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    /// Quality-driven weights (the default).
    Quality,
    /// All node and arc weights equal to 1.
    Constant,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quality" => Ok(WeightMode::Quality),
            "constant" => Ok(WeightMode::Constant),
            other => Err(Error::InvalidArgument(format!("unknown weight mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualArc {
    /// Endpoint elements, a < b.
    pub a: usize,
    pub b: usize,
    /// Interface index (edge in 2D, face in 3D).
    pub interface: usize,
    pub weight: f64,
    /// Rescaled positive integer weight used by the partitioner.
    pub iweight: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualGraph {
    pub node_weights: Vec<f64>,
    pub node_iweights: Vec<i64>,
    pub arcs: Vec<DualArc>,
    /// Per node, (arc index, other node) pairs.
    pub adjacency: Vec<Vec<(usize, usize)>>,
}

impl DualGraph {
    pub fn num_nodes(&self) -> usize {
        self.node_weights.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }
}

/// Builds the dual graph of a mesh. In quality mode, arcs whose pairwise
/// union is non-manifold get weight zero (cutting them costs nothing).
pub fn build_dual_graph(
    mesh: &Mesh,
    mode: WeightMode,
    config: &crate::config::Config,
) -> Result<DualGraph> {
    let n = mesh.num_elements();
    if n == 0 {
        return Err(Error::EmptyMesh);
    }
    let interfaces: Vec<(usize, usize, usize)> = match mesh {
        Mesh::Two(m) => (0..m.num_edges())
            .filter(|&e| m.edge_faces[e].len() == 2)
            .map(|e| (e, m.edge_faces[e][0], m.edge_faces[e][1]))
            .collect(),
        Mesh::Three(m) => (0..m.num_faces())
            .filter(|&f| m.face_cells[f].len() == 2)
            .map(|f| (f, m.face_cells[f][0], m.face_cells[f][1]))
            .collect(),
    };

    let (node_weights, arc_weights): (Vec<f64>, Vec<f64>) = match mode {
        WeightMode::Constant => (vec![1.0; n], vec![1.0; interfaces.len()]),
        WeightMode::Quality => {
            let node_weights: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|e| element_quality(mesh, e).map(|q| q.element))
                .collect::<Result<_>>()?;
            let arc_weights: Vec<f64> = interfaces
                .par_iter()
                .map(|&(_, p, q)| pair_union_quality(mesh, p, q))
                .collect::<Result<_>>()?;
            (node_weights, arc_weights)
        }
    };

    let node_iweights = rescale_weights(&node_weights, n, config.c_w);
    let arc_iweights = rescale_weights(&arc_weights, n, config.c_w);
    let mut arcs = Vec::with_capacity(interfaces.len());
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(interface, p, q)) in interfaces.iter().enumerate() {
        let (a, b) = (p.min(q), p.max(q));
        adjacency[a].push((i, b));
        adjacency[b].push((i, a));
        arcs.push(DualArc { a, b, interface, weight: arc_weights[i], iweight: arc_iweights[i] });
    }
    Ok(DualGraph { node_weights, node_iweights, arcs, adjacency })
}

/// Quality of the union of two interface-adjacent elements, or zero if the
/// union is not a valid single element.
pub fn pair_union_quality(mesh: &Mesh, p: usize, q: usize) -> Result<f64> {
    let set = [p.min(q), p.max(q)];
    let merged = match mesh {
        Mesh::Two(m) => crate::agglomerate::merge_faces_2d(m, &set).map(|cycle| {
            let poly: Vec<_> = cycle.iter().map(|&v| m.vertices[v]).collect();
            polygon_quality(&poly).map(|qv| qv.element)
        }),
        Mesh::Three(m) => crate::agglomerate::merge_cells_3d(m, &set).map(|kept| {
            let cycles: Vec<Vec<usize>> = kept
                .iter()
                .map(|&(f, s)| {
                    let mut c = m.faces[f].clone();
                    if !s {
                        c.reverse();
                    }
                    c
                })
                .collect();
            cell_quality(&m.vertices, &cycles).map(|qv| qv.element)
        }),
    };
    match merged {
        Ok(Ok(w)) => Ok(w),
        Ok(Err(Error::DegenerateElement { .. })) => Ok(0.0),
        Ok(Err(e)) => Err(e),
        Err(Error::NonManifoldUnion) | Err(Error::DisconnectedUnion) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Maps real weights in [0, 1] to positive integers 1 + floor(w * N / c_w),
/// where N is the element count. This keeps relative differences while
/// guaranteeing strictly positive weights.
pub fn rescale_weights(weights: &[f64], n_elements: usize, c_w: f64) -> Vec<i64> {
    weights
        .iter()
        .map(|&w| 1 + (w * n_elements as f64 / c_w).floor() as i64)
        .collect()
}
