//! Virtual element discretization of the Poisson and backward-Euler heat
//! problems on polytopal meshes: 2D orders 1..3, 3D order 1.
//!
//! Degrees of freedom are vertex values, k-1 internal Gauss-Legendre node
//! values per edge, and internal moments against scaled monomials of degree
//! <= k-2 per element. Dirichlet conditions are eliminated by substitution.

mod local2;
mod local3;
pub mod monomials;
pub mod quadrature;

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Point3, Vector3};
use rayon::prelude::*;

use crate::mesh::Mesh;
use crate::sparse::{self, SparseSym};
use crate::{Error, Result};

/// Pointwise scalar field.
pub type ScalarFn<'a> = &'a (dyn Fn(&Point3<f64>) -> f64 + Sync);
/// Pointwise gradient field (z component ignored in 2D).
pub type GradFn<'a> = &'a (dyn Fn(&Point3<f64>) -> Vector3<f64> + Sync);
/// Time-dependent scalar field.
pub type TimeScalarFn<'a> = &'a (dyn Fn(f64, &Point3<f64>) -> f64 + Sync);

/// Global degree-of-freedom layout: vertices, then edge nodes, then
/// per-element internal moments.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub k: usize,
    pub dim: usize,
    pub n_dofs: usize,
    /// Start of the edge-node block (equals the vertex count).
    pub edge_offset: usize,
    /// Start of the element-moment block.
    pub cell_offset: usize,
    /// Internal moment DOFs per element: dim P_{k-2}.
    pub moments_per_element: usize,
    /// Dirichlet mask: true for DOFs on the domain boundary.
    pub is_boundary: Vec<bool>,
    /// Coordinates of nodal DOFs; None for moment DOFs.
    pub positions: Vec<Option<Point3<f64>>>,
}

pub fn build_dof_map(mesh: &Mesh, k: usize) -> Result<DofMap> {
    match mesh {
        Mesh::Two(m) => {
            if !(1..=3).contains(&k) {
                return Err(Error::UnsupportedOrder { k, dim: 2 });
            }
            let nv = m.num_vertices();
            let ne = m.num_edges();
            let npe = monomials::space_dim(2, k as isize - 2);
            let n = nv + ne * (k - 1) + m.num_faces() * npe;
            let mut is_boundary = vec![false; n];
            let mut positions = vec![None; n];
            for v in 0..nv {
                is_boundary[v] = m.boundary_vertex[v];
                positions[v] = Some(Point3::new(m.vertices[v].x, m.vertices[v].y, 0.0));
            }
            let tg = local2::edge_node_params(k);
            for (e, &[a, b]) in m.edges.iter().enumerate() {
                for (j, &t) in tg.iter().enumerate() {
                    let idx = nv + e * (k - 1) + j;
                    is_boundary[idx] = m.boundary_edge[e];
                    let p = m.vertices[a] + (m.vertices[b] - m.vertices[a]) * t;
                    positions[idx] = Some(Point3::new(p.x, p.y, 0.0));
                }
            }
            Ok(DofMap {
                k,
                dim: 2,
                n_dofs: n,
                edge_offset: nv,
                cell_offset: nv + ne * (k - 1),
                moments_per_element: npe,
                is_boundary,
                positions,
            })
        }
        Mesh::Three(m) => {
            if k != 1 {
                return Err(Error::UnsupportedOrder { k, dim: 3 });
            }
            let nv = m.num_vertices();
            Ok(DofMap {
                k,
                dim: 3,
                n_dofs: nv,
                edge_offset: nv,
                cell_offset: nv,
                moments_per_element: 0,
                is_boundary: m.boundary_vertex.clone(),
                positions: m.vertices.iter().map(|p| Some(*p)).collect(),
            })
        }
    }
}

/// Global DOF indices of an element, in the local ordering used by
/// `local_operators`.
pub fn element_dofs(mesh: &Mesh, dm: &DofMap, element: usize) -> Vec<usize> {
    match mesh {
        Mesh::Two(m) => {
            let k = dm.k;
            let cycle = &m.faces[element];
            let nv = cycle.len();
            let mut out = Vec::with_capacity(nv * k + dm.moments_per_element);
            out.extend(cycle.iter().copied());
            for i in 0..nv {
                let (u, v) = (cycle[i], cycle[(i + 1) % nv]);
                let e = m.face_edges[element][i];
                for s in 0..k - 1 {
                    let j = if u < v { s } else { k - 2 - s };
                    out.push(dm.edge_offset + e * (k - 1) + j);
                }
            }
            for mth in 0..dm.moments_per_element {
                out.push(dm.cell_offset + element * dm.moments_per_element + mth);
            }
            out
        }
        Mesh::Three(m) => m.cell_vertices(element),
    }
}

/// Projector matrices and local stiffness/mass of one element.
///
/// Coefficient matrices map local DOF vectors to coefficients in the
/// element's polynomial basis (see `coeffs`): `pinabla_star`/`pi0_star`
/// onto P_k, `grad_star[d]` onto P_{k-1} per gradient component.
pub struct LocalOperators {
    pub n_dofs: usize,
    pub dim: usize,
    pub k: usize,
    pub measure: f64,
    pub diameter: f64,
    pub centroid: Point3<f64>,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub pi0_star: DMatrix<f64>,
    pub grad_star: Vec<DMatrix<f64>>,
    pub pinabla_star: DMatrix<f64>,
    /// DOF-space H1 projection D G^{-1} B.
    pub pinabla_dof: DMatrix<f64>,
    /// The D matrix: DOFs of each polynomial basis function.
    pub basis: DMatrix<f64>,
    /// Lower-triangular change of basis from the scaled monomials to the
    /// element's polynomial basis: basis function a = sum_b coeffs[(a, b)]
    /// * monomial b. Leading blocks give the bases of the lower degrees.
    pub coeffs: DMatrix<f64>,
    /// Element quadrature of degree 2k+2 (z = 0 in 2D).
    pub quad: Vec<(Point3<f64>, f64)>,
}

impl LocalOperators {
    /// Values of the scaled monomials of degree <= deg at a point.
    pub fn eval_monomials(&self, deg: usize, p: &Point3<f64>) -> Vec<f64> {
        if self.dim == 2 {
            let c = nalgebra::Point2::new(self.centroid.x, self.centroid.y);
            let q = nalgebra::Point2::new(p.x, p.y);
            monomials::exponents_2d(deg)
                .into_iter()
                .map(|e| monomials::eval_2d(e, &c, self.diameter, &q))
                .collect()
        } else {
            monomials::exponents_3d(deg)
                .into_iter()
                .map(|e| monomials::eval_3d(e, &self.centroid, self.diameter, p))
                .collect()
        }
    }

    /// Values of the polynomial basis of degree <= deg at a point.
    pub fn eval_basis(&self, deg: usize, p: &Point3<f64>) -> Vec<f64> {
        let m = self.eval_monomials(deg, p);
        (0..m.len())
            .map(|a| (0..=a).map(|b| self.coeffs[(a, b)] * m[b]).sum())
            .collect()
    }

    /// Local load vector (f, Pi0_k phi_i).
    pub fn load(&self, f: ScalarFn) -> DVector<f64> {
        let nk = self.pi0_star.nrows();
        let mut b = DVector::zeros(nk);
        for &(p, w) in &self.quad {
            let fv = f(&p);
            let m = self.eval_basis(self.k, &p);
            for a in 0..nk {
                b[a] += w * fv * m[a];
            }
        }
        self.pi0_star.transpose() * b
    }
}

pub fn local_operators(mesh: &Mesh, element: usize, k: usize) -> Result<LocalOperators> {
    match mesh {
        Mesh::Two(m) => {
            if !(1..=3).contains(&k) {
                return Err(Error::UnsupportedOrder { k, dim: 2 });
            }
            local2::local_ops_2d(m, element, k)
        }
        Mesh::Three(m) => local3::local_ops_3d(m, element, k),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub assemble: f64,
    pub factorize: f64,
    pub solve: f64,
}

/// Assembled, Dirichlet-eliminated linear system.
pub struct VemSystem {
    pub k: usize,
    pub dof_map: DofMap,
    /// Reduced SPD matrix over the free DOFs.
    pub matrix: SparseSym,
    pub rhs: Vec<f64>,
    /// Free index -> global DOF.
    pub free: Vec<usize>,
    /// Full-length vector holding the Dirichlet values (0 on free DOFs).
    pub boundary_values: Vec<f64>,
    pub timings: Timings,
}

/// Assembles the Poisson problem -Lap u = f with Dirichlet data g sampled
/// at the boundary DOF nodes; g = None keeps all DOFs free (the resulting
/// system is singular and `solve` reports it).
pub fn assemble_poisson(mesh: &Mesh, k: usize, f: ScalarFn, g: Option<ScalarFn>) -> Result<VemSystem> {
    let dm = build_dof_map(mesh, k)?;
    let t0 = Instant::now();
    let locals = assemble_locals(mesh, &dm, k, |ops| ops.load(f))?;
    let (matrix, rhs, free, boundary_values) =
        reduce(&dm, &locals, |d| d.stiffness_view(), g, 0.0)?;
    let timings = Timings { assemble: t0.elapsed().as_secs_f64(), ..Default::default() };
    Ok(VemSystem { k, dof_map: dm, matrix, rhs, free, boundary_values, timings })
}

struct ElementContrib {
    dofs: Vec<usize>,
    stiffness: DMatrix<f64>,
    mass: DMatrix<f64>,
    load: DVector<f64>,
}

impl ElementContrib {
    fn stiffness_view(&self) -> &DMatrix<f64> {
        &self.stiffness
    }
}

fn assemble_locals(
    mesh: &Mesh,
    dm: &DofMap,
    k: usize,
    load: impl Fn(&LocalOperators) -> DVector<f64> + Sync,
) -> Result<Vec<ElementContrib>> {
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let ops = local_operators(mesh, e, k)?;
            Ok(ElementContrib {
                dofs: element_dofs(mesh, dm, e),
                load: load(&ops),
                stiffness: ops.stiffness,
                mass: ops.mass,
            })
        })
        .collect()
}

/// Scatters local matrices into the reduced system, eliminating Dirichlet
/// DOFs by substitution. `mass_shift` adds mass/dt to the matrix (heat).
fn reduce(
    dm: &DofMap,
    locals: &[ElementContrib],
    matrix_of: impl Fn(&ElementContrib) -> &DMatrix<f64>,
    g: Option<ScalarFn>,
    mass_shift: f64,
) -> Result<(SparseSym, Vec<f64>, Vec<usize>, Vec<f64>)> {
    let n = dm.n_dofs;
    let mut boundary_values = vec![0.0; n];
    let mut free_of = vec![usize::MAX; n];
    let mut free = Vec::new();
    for i in 0..n {
        if g.is_some() && dm.is_boundary[i] {
            let p = dm.positions[i].expect("boundary DOFs are nodal");
            boundary_values[i] = g.unwrap()(&p);
        } else {
            free_of[i] = free.len();
            free.push(i);
        }
    }
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for c in locals {
        let a = matrix_of(c);
        for (li, &gi) in c.dofs.iter().enumerate() {
            let fi = free_of[gi];
            if fi == usize::MAX {
                continue;
            }
            rhs[fi] += c.load[li];
            for (lj, &gj) in c.dofs.iter().enumerate() {
                let v = a[(li, lj)] + mass_shift * c.mass[(li, lj)];
                let fj = free_of[gj];
                if fj == usize::MAX {
                    rhs[fi] -= v * boundary_values[gj];
                } else {
                    triplets.push((fi, fj, v));
                }
            }
        }
    }
    Ok((SparseSym::from_triplets(free.len(), &triplets), rhs, free, boundary_values))
}

impl VemSystem {
    /// Solves the reduced system (direct LDL, Jacobi-CG fallback) and
    /// returns the full-length DOF vector including boundary values.
    pub fn solve(&mut self) -> Result<Vec<f64>> {
        let mut full = self.boundary_values.clone();
        if self.free.is_empty() {
            return Ok(full);
        }
        let t0 = Instant::now();
        let direct = sparse::factorize(&self.matrix).map(|f| {
            self.timings.factorize = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let x = f.solve(&self.rhs);
            self.timings.solve = t1.elapsed().as_secs_f64();
            x
        });
        // A singular matrix can slip through either path (a tiny positive
        // pivot, or a collapsed CG recurrence); validate by true residual.
        let validate = |x: Vec<f64>| -> Result<Vec<f64>> {
            let mut ax = vec![0.0; x.len()];
            self.matrix.matvec(&x, &mut ax);
            let rn: f64 = ax.iter().zip(&self.rhs).map(|(a, b)| (a - b) * (a - b)).sum();
            let bn: f64 = self.rhs.iter().map(|b| b * b).sum();
            if rn.sqrt() <= 1e-8 * bn.sqrt().max(f64::MIN_POSITIVE) {
                Ok(x)
            } else {
                Err(Error::NotPositiveDefinite)
            }
        };
        let x = match direct.and_then(&validate) {
            Ok(x) => x,
            Err(Error::NotPositiveDefinite) => {
                let t1 = Instant::now();
                let (x, _) = sparse::pcg_jacobi(&self.matrix, &self.rhs, 1e-12, 10 * self.matrix.n)
                    .map_err(|_| Error::NotPositiveDefinite)?;
                self.timings.solve = t1.elapsed().as_secs_f64();
                validate(x).map_err(|_| Error::NotPositiveDefinite)?
            }
            Err(e) => return Err(e),
        };
        for (fi, &gi) in self.free.iter().enumerate() {
            full[gi] = x[fi];
        }
        Ok(full)
    }

    /// Spectral condition number of the reduced matrix.
    pub fn condition_estimate(&self) -> Result<f64> {
        estimate_condition_number(&self.matrix)
    }
}

/// lambda_max / lambda_min of an SPD matrix via power and inverse iteration.
pub fn estimate_condition_number(a: &SparseSym) -> Result<f64> {
    let f = sparse::factorize(a)?;
    Ok(sparse::condition_estimate(a, &f))
}

/// Interpolates a smooth function into the DOFs: pointwise at nodal DOFs,
/// scaled-monomial moments on each element.
pub fn interpolate(mesh: &Mesh, k: usize, u: ScalarFn) -> Result<Vec<f64>> {
    let dm = build_dof_map(mesh, k)?;
    let mut out = vec![0.0; dm.n_dofs];
    for i in 0..dm.cell_offset {
        out[i] = u(&dm.positions[i].unwrap());
    }
    if dm.moments_per_element > 0 {
        for e in 0..mesh.num_elements() {
            let ops = local_operators(mesh, e, k)?;
            for mth in 0..dm.moments_per_element {
                let mut v = 0.0;
                for &(p, w) in &ops.quad {
                    v += w * u(&p) * ops.eval_monomials(k - 2, &p)[mth];
                }
                out[dm.cell_offset + e * dm.moments_per_element + mth] = v / ops.measure;
            }
        }
    }
    Ok(out)
}

/// Relative L2 and H1-seminorm errors of a DOF vector against an exact
/// solution, measured through the element projectors.
pub fn errors(
    mesh: &Mesh,
    k: usize,
    u_h: &[f64],
    u_exact: ScalarFn,
    grad_exact: GradFn,
) -> Result<(f64, f64)> {
    let dm = build_dof_map(mesh, k)?;
    let dim = mesh.dim();
    // Collected per element and summed in index order for reproducibility.
    let parts = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| -> Result<[f64; 4]> {
            let ops = local_operators(mesh, e, k)?;
            let dofs = element_dofs(mesh, &dm, e);
            let d = DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| u_h[g]));
            let c0 = &ops.pi0_star * &d;
            let cg: Vec<DVector<f64>> = ops.grad_star.iter().map(|g| g * &d).collect();
            let mut s = [0.0; 4];
            for &(p, w) in &ops.quad {
                let mk = ops.eval_basis(k, &p);
                let uh: f64 = (0..c0.len()).map(|a| c0[a] * mk[a]).sum();
                let uv = u_exact(&p);
                s[0] += w * (uv - uh) * (uv - uh);
                s[1] += w * uv * uv;
                let gv = grad_exact(&p);
                for (dcomp, cgd) in cg.iter().enumerate() {
                    let gh: f64 = (0..cgd.len()).map(|a| cgd[a] * mk[a]).sum();
                    let diff = gv[dcomp] - gh;
                    s[2] += w * diff * diff;
                    s[3] += w * gv[dcomp] * gv[dcomp];
                }
                if dim == 2 {
                    s[3] += w * gv.z * gv.z;
                }
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let acc = parts.iter().fold([0.0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    // The composite quadrature carries negative weights, so a residual at
    // round-off level can sum to a slightly negative value; clamp it.
    Ok(((acc[0].max(0.0) / acc[1]).sqrt(), (acc[2].max(0.0) / acc[3]).sqrt()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HeatTimings {
    pub assemble: f64,
    pub factorize: f64,
    pub solve: f64,
    pub total: f64,
}

/// Backward Euler for u_t - Lap u = f with Dirichlet data g(t, x) and
/// initial state u0, over n_steps uniform steps up to t_final. Returns the
/// DOF vector at every time level (index 0 is the interpolated u0); the
/// factorization of M/dt + A is reused across steps.
pub fn solve_heat_backward_euler(
    mesh: &Mesh,
    k: usize,
    f: TimeScalarFn,
    g: TimeScalarFn,
    u0: ScalarFn,
    t_final: f64,
    n_steps: usize,
) -> Result<(Vec<Vec<f64>>, HeatTimings)> {
    let whole = Instant::now();
    let mut timings = HeatTimings::default();
    let mut states = vec![interpolate(mesh, k, u0)?];
    if n_steps == 0 {
        timings.total = whole.elapsed().as_secs_f64();
        return Ok((states, timings));
    }
    let dt = t_final / n_steps as f64;
    let dm = build_dof_map(mesh, k)?;
    let n = dm.n_dofs;

    let t0 = Instant::now();
    // Keep per-element operators: loads are rebuilt every step.
    let ops: Vec<(Vec<usize>, LocalOperators)> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| Ok((element_dofs(mesh, &dm, e), local_operators(mesh, e, k)?)))
        .collect::<Result<Vec<_>>>()?;
    // Full (unreduced) mass and shifted matrices for right-hand sides.
    let mut mass_tr = Vec::new();
    let mut shift_tr = Vec::new();
    for (dofs, op) in &ops {
        for (li, &gi) in dofs.iter().enumerate() {
            for (lj, &gj) in dofs.iter().enumerate() {
                mass_tr.push((gi, gj, op.mass[(li, lj)]));
                shift_tr.push((gi, gj, op.mass[(li, lj)] / dt + op.stiffness[(li, lj)]));
            }
        }
    }
    let mass_full = SparseSym::from_triplets(n, &mass_tr);
    let shift_full = SparseSym::from_triplets(n, &shift_tr);
    // Reduced M/dt + A over the free DOFs.
    let mut free_of = vec![usize::MAX; n];
    let mut free = Vec::new();
    for i in 0..n {
        if !dm.is_boundary[i] {
            free_of[i] = free.len();
            free.push(i);
        }
    }
    let mut red_tr = Vec::new();
    for (dofs, op) in &ops {
        for (li, &gi) in dofs.iter().enumerate() {
            if free_of[gi] == usize::MAX {
                continue;
            }
            for (lj, &gj) in dofs.iter().enumerate() {
                if free_of[gj] != usize::MAX {
                    red_tr.push((
                        free_of[gi],
                        free_of[gj],
                        op.mass[(li, lj)] / dt + op.stiffness[(li, lj)],
                    ));
                }
            }
        }
    }
    let reduced = SparseSym::from_triplets(free.len(), &red_tr);
    timings.assemble = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let factor = sparse::factorize(&reduced)?;
    timings.factorize = t1.elapsed().as_secs_f64();

    let mut mu = vec![0.0; n];
    let mut sg = vec![0.0; n];
    for step in 1..=n_steps {
        let t = dt * step as f64;
        // Load at the new time level.
        let mut load = vec![0.0; n];
        let ft = |p: &Point3<f64>| f(t, p);
        for (dofs, op) in &ops {
            let fl = op.load(&ft);
            for (li, &gi) in dofs.iter().enumerate() {
                load[gi] += fl[li];
            }
        }
        // rhs = [M u^n / dt + F - (M/dt + A) ghat]_free.
        mass_full.matvec(states.last().unwrap(), &mut mu);
        let mut ghat = vec![0.0; n];
        for i in 0..n {
            if dm.is_boundary[i] {
                ghat[i] = g(t, &dm.positions[i].expect("boundary DOFs are nodal"));
            }
        }
        shift_full.matvec(&ghat, &mut sg);
        let rhs: Vec<f64> = free.iter().map(|&i| mu[i] / dt + load[i] - sg[i]).collect();
        let t2 = Instant::now();
        let x = factor.solve(&rhs);
        timings.solve += t2.elapsed().as_secs_f64();
        let mut full = ghat;
        for (fi, &gi) in free.iter().enumerate() {
            full[gi] = x[fi];
        }
        states.push(full);
    }
    timings.total = whole.elapsed().as_secs_f64();
    Ok((states, timings))
}
