//! Local virtual element operators on a polygonal element (orders 1..3).
//!
//! The construction follows the usual D/B/G matrix recipe: the H1 projector
//! comes from the variational definition with boundary-average zero-mean
//! constraint, the L2 projector from the enhanced-space moments, and the
//! projected gradient from integration by parts. Edge integrals use
//! Gauss-Legendre quadrature with the shape functions expressed as Lagrange
//! interpolants through the edge DOF nodes.
//!
//! Projector coefficients are expressed in an L2-orthonormalized polynomial
//! basis q = S m (S lower triangular, m the scaled monomials). On stretched
//! elements the scaled monomials become nearly dependent and the projector
//! systems lose their accuracy; orthonormalizing keeps every linear solve
//! here well conditioned regardless of element shape. DOF definitions
//! (vertex/edge values and monomial moments) are unaffected.

use nalgebra::{DMatrix, DVector, Point2, Point3, Vector2};

use super::monomials as mono;
use super::quadrature;
use super::LocalOperators;
use crate::mesh::Mesh2;
use crate::{Error, Result};

/// Internal edge DOF parameters in (0, 1), ascending: the k-1 interior
/// Gauss-Legendre nodes mapped from [-1, 1].
pub(super) fn edge_node_params(k: usize) -> Vec<f64> {
    if k < 2 {
        return Vec::new();
    }
    quadrature::gauss_legendre(k - 1).iter().map(|&(x, _)| 0.5 * (x + 1.0)).collect()
}

/// Lagrange basis values at parameter t for nodes ts.
fn lagrange(ts: &[f64], t: f64) -> Vec<f64> {
    (0..ts.len())
        .map(|s| {
            let mut v = 1.0;
            for r in 0..ts.len() {
                if r != s {
                    v *= (t - ts[r]) / (ts[s] - ts[r]);
                }
            }
            v
        })
        .collect()
}

pub(super) fn local_ops_2d(mesh: &Mesh2, face: usize, k: usize) -> Result<LocalOperators> {
    let meas = mesh.measures(face)?;
    let area = meas.size;
    let h = meas.diameter;
    let c = Point2::new(meas.centroid.x, meas.centroid.y);

    let cycle = &mesh.faces[face];
    let nv = cycle.len();
    let exps = mono::exponents_2d(k);
    let nk = exps.len();
    let nkm1 = mono::space_dim(2, k as isize - 1);
    let nkm2 = mono::space_dim(2, k as isize - 2);
    let n = nv * k + nkm2;

    let poly = mesh.face_polygon(face);
    let quad2 = quadrature::polygon_rule(&poly, 2 * k + 2).ok_or_else(|| {
        Error::QuadratureFailure { element: face, reason: "polygon triangulation failed".into() }
    })?;

    // Orthonormalize the scaled monomials by modified Gram-Schmidt (with
    // reorthogonalization) on the quadrature values weighted by sqrt|w|:
    // the composite rule has some negative weights, so this is not the L2
    // product itself, but a spectrally equivalent positive one, which is
    // all the conditioning of the basis needs. S = R^{-T} is lower
    // triangular; the true monomial mass matrix H is kept separately and
    // becomes the well-conditioned S H S^T in the new basis.
    let nq = quad2.len();
    let mut vq = DMatrix::zeros(nq, nk);
    let mut hm = DMatrix::zeros(nk, nk);
    for (qi, &(p, w)) in quad2.iter().enumerate() {
        let sw = w.abs().sqrt();
        for (a, &e) in exps.iter().enumerate() {
            vq[(qi, a)] = sw * mono::eval_2d(e, &c, h, &p);
        }
        for a in 0..nk {
            for b in 0..=a {
                hm[(a, b)] += w.signum() * vq[(qi, a)] * vq[(qi, b)];
            }
        }
    }
    for a in 0..nk {
        for b in (a + 1)..nk {
            hm[(a, b)] = hm[(b, a)];
        }
    }
    let mut r = DMatrix::zeros(nk, nk);
    for j in 0..nk {
        for _ in 0..2 {
            for i in 0..j {
                let dot = vq.column(i).dot(&vq.column(j));
                r[(i, j)] += dot;
                let ci = vq.column(i).into_owned();
                vq.column_mut(j).axpy(-dot, &ci, 1.0);
            }
        }
        let nrm = vq.column(j).norm();
        if !(nrm > 0.0) {
            return Err(Error::DegenerateElement { element: face });
        }
        r[(j, j)] = nrm;
        vq.column_mut(j).scale_mut(1.0 / nrm);
    }
    let s = r
        .transpose()
        .solve_lower_triangular(&DMatrix::identity(nk, nk))
        .ok_or(Error::DegenerateElement { element: face })?;

    // Edge geometry: per boundary edge, the local DOF indices in traversal
    // order, Lagrange node parameters, and the physical node positions
    // (computed from the global min->max parameterization so that both
    // elements sharing an edge see bit-identical node coordinates).
    let tg = edge_node_params(k);
    let node_pos = |u: usize, v: usize, s: usize| -> Point2<f64> {
        // s-th internal node along the traversal u -> v.
        let (g0, g1) = (u.min(v), u.max(v));
        let j = if u < v { s } else { k - 2 - s };
        let a = mesh.vertices[g0];
        let b = mesh.vertices[g1];
        a + (b - a) * tg[j]
    };

    // DOF matrix D.
    let mut d = DMatrix::zeros(n, nk);
    for (i, &v) in cycle.iter().enumerate() {
        for (a, &e) in exps.iter().enumerate() {
            d[(i, a)] = mono::eval_2d(e, &c, h, &mesh.vertices[v]);
        }
    }
    for i in 0..nv {
        let (u, v) = (cycle[i], cycle[(i + 1) % nv]);
        for s in 0..k.saturating_sub(1) {
            let p = node_pos(u, v, s);
            for (a, &e) in exps.iter().enumerate() {
                d[(nv + i * (k - 1) + s, a)] = mono::eval_2d(e, &c, h, &p);
            }
        }
    }
    for b in 0..nkm2 {
        for a in 0..nk {
            d[(nv * k + b, a)] = hm[(b, a)] / area;
        }
    }

    // B (H1 projector right-hand sides, monomial rows; the constant row is
    // the boundary-average constraint accumulated separately) and the
    // gradient-projection right-hand sides Ex, Ey, all via edge quadrature
    // plus interior moments.
    let mut bm = DMatrix::zeros(nk, n);
    let mut avg = DVector::zeros(n);
    let mut ex = DMatrix::zeros(nkm1, n);
    let mut ey = DMatrix::zeros(nkm1, n);
    let gl = quadrature::gauss_legendre(k + 1);
    let perimeter: f64 = meas.edge_lengths.iter().sum();
    for i in 0..nv {
        let (u, v) = (cycle[i], cycle[(i + 1) % nv]);
        let (pa, pb) = (mesh.vertices[u], mesh.vertices[v]);
        let edge = pb - pa;
        let len = edge.norm();
        let normal = Vector2::new(edge.y, -edge.x) / len; // outward for CCW
        // Lagrange nodes along the traversal: endpoints plus internal nodes.
        let mut ts = Vec::with_capacity(k + 1);
        ts.push(0.0);
        for s in 0..k.saturating_sub(1) {
            let j = if u < v { s } else { k - 2 - s };
            ts.push(if u < v { tg[j] } else { 1.0 - tg[j] });
        }
        ts.push(1.0);
        let dof_of = |s: usize| -> usize {
            if s == 0 {
                i
            } else if s == k {
                (i + 1) % nv
            } else {
                nv + i * (k - 1) + (s - 1)
            }
        };
        for &(x, w) in &gl {
            let t = 0.5 * (x + 1.0);
            let wq = 0.5 * w * len;
            let p = pa + edge * t;
            let basis = lagrange(&ts, t);
            let gn: Vec<f64> = exps
                .iter()
                .map(|&e| {
                    let g = mono::grad_2d(e, &c, h, &p);
                    g.x * normal.x + g.y * normal.y
                })
                .collect();
            let mv: Vec<f64> = exps[..nkm1].iter().map(|&e| mono::eval_2d(e, &c, h, &p)).collect();
            for (s, &phi) in basis.iter().enumerate() {
                let j = dof_of(s);
                avg[j] += wq * phi / perimeter;
                for a in 1..nk {
                    bm[(a, j)] += wq * phi * gn[a];
                }
                for a in 0..nkm1 {
                    ex[(a, j)] += wq * phi * mv[a] * normal.x;
                    ey[(a, j)] += wq * phi * mv[a] * normal.y;
                }
            }
        }
    }
    for a in 1..nk {
        for (coeff, bidx) in mono::laplacian_2d(exps[a], h) {
            bm[(a, nv * k + bidx)] -= coeff * area;
        }
    }
    for a in 0..nkm1 {
        let (axp, ayp) = exps[a];
        if axp >= 1 {
            ex[(a, nv * k + mono::index_2d((axp - 1, ayp)))] -= axp as f64 / h * area;
        }
        if ayp >= 1 {
            ey[(a, nv * k + mono::index_2d((axp, ayp - 1)))] -= ayp as f64 / h * area;
        }
    }

    // Change of basis: DOFs of the new basis functions, their B rows
    // (constant row overwritten by the constraint), the gradient right-hand
    // sides, and the near-identity polynomial mass matrix.
    let dq = &d * s.transpose();
    let mut bq = &s * &bm;
    for j in 0..n {
        bq[(0, j)] = avg[j];
    }
    let s1 = s.view((0, 0), (nkm1, nkm1));
    let exq = s1 * &ex;
    let eyq = s1 * &ey;
    let hq = &s * &hm * s.transpose();

    let g = &bq * &dq;
    let g_lu = g.lu();
    let pinabla_star = g_lu
        .solve(&bq)
        .ok_or(Error::DegenerateElement { element: face })?;

    // L2 projector: moments up to k-2 are DOFs (monomial moments, expanded
    // through S), higher moments come from the enhanced-space identity with
    // the H1 projection.
    let mut cm = DMatrix::zeros(nk, n);
    let hp = &hq * &pinabla_star;
    for a in 0..nk {
        if a < nkm2 {
            for b in 0..=a {
                cm[(a, nv * k + b)] = area * s[(a, b)];
            }
        } else {
            for j in 0..n {
                cm[(a, j)] = hp[(a, j)];
            }
        }
    }
    let hq_chol = hq
        .clone()
        .cholesky()
        .ok_or(Error::DegenerateElement { element: face })?;
    let pi0_star = hq_chol.solve(&cm);

    let hq1_chol = hq
        .view((0, 0), (nkm1, nkm1))
        .into_owned()
        .cholesky()
        .ok_or(Error::DegenerateElement { element: face })?;
    let gx = hq1_chol.solve(&exq);
    let gy = hq1_chol.solve(&eyq);

    // Stiffness: consistency through the projected gradient plus dofi-dofi
    // stabilization on the H1 projection complement.
    let pinabla_dof = &dq * &pinabla_star;
    let mut stiffness = exq.transpose() * &gx + eyq.transpose() * &gy;
    let comp = DMatrix::identity(n, n) - &pinabla_dof;
    // Diagonally rescaled (D-recipe) stabilization: weight each DOF by the
    // consistency energy it carries, floored at the isotropic scale. On
    // stretched elements the plain identity weighting underestimates the
    // energy of DOFs along the short direction and ruins convergence.
    let sw = DVector::from_iterator(n, (0..n).map(|i| stiffness[(i, i)].max(1.0)));
    stiffness += comp.transpose() * DMatrix::from_diagonal(&sw) * &comp;
    symmetrize(&mut stiffness);

    // Mass: L2 consistency plus the same recipe at the |P| scale.
    let pi0_dof = &dq * &pi0_star;
    let mut mass = cm.transpose() * &pi0_star;
    let comp0 = DMatrix::identity(n, n) - &pi0_dof;
    let mw = DVector::from_iterator(n, (0..n).map(|i| mass[(i, i)].max(area)));
    mass += comp0.transpose() * DMatrix::from_diagonal(&mw) * &comp0;
    symmetrize(&mut mass);

    Ok(LocalOperators {
        n_dofs: n,
        dim: 2,
        k,
        measure: area,
        diameter: h,
        centroid: meas.centroid,
        stiffness,
        mass,
        pi0_star,
        grad_star: vec![gx, gy],
        pinabla_star,
        pinabla_dof,
        basis: dq,
        coeffs: s,
        quad: quad2.iter().map(|&(p, w)| (Point3::new(p.x, p.y, 0.0), w)).collect(),
    })
}

pub(super) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
