//! Local virtual element operators on a polyhedral cell, lowest order.
//!
//! All cell-boundary integrals reduce to face integrals of the shape
//! functions, which are evaluated through the face H1 projector built from
//! the face-vertex DOFs; this is the enhanced-space value of the integral
//! and keeps the construction exact for polynomials on planar faces.

use std::collections::HashMap;

use nalgebra::{DMatrix, Point2};

use super::local2::symmetrize;
use super::monomials as mono;
use super::quadrature;
use super::LocalOperators;
use crate::mesh::Mesh3;
use crate::{Error, Result};

/// Integral of each face-vertex shape function over the face, via the face
/// H1 projector of order 1, plus the face area and unit outward normal.
fn face_integrals(
    mesh: &Mesh3,
    cell: usize,
    cycle: &[usize],
) -> Result<(Vec<f64>, f64, nalgebra::Vector3<f64>)> {
    let nvf = cycle.len();
    let flat = quadrature::flatten_cycle(&mesh.vertices, cycle);
    let area = crate::geometry::polygon_area(&flat);
    if area <= 0.0 {
        return Err(Error::DegenerateElement { element: cell });
    }
    let normal = quadrature::newell_normal(&mesh.vertices, cycle).normalize();

    // Face centroid and diameter in planar coordinates.
    let mut ctr = Point2::origin();
    let mut twice = 0.0;
    for i in 0..nvf {
        let (a, b) = (flat[i], flat[(i + 1) % nvf]);
        let cr = a.x * b.y - b.x * a.y;
        twice += cr;
        ctr.x += (a.x + b.x) * cr;
        ctr.y += (a.y + b.y) * cr;
    }
    ctr /= 3.0 * twice;
    let mut hf = 0.0f64;
    for i in 0..nvf {
        for j in (i + 1)..nvf {
            hf = hf.max((flat[i] - flat[j]).norm());
        }
    }

    // Order-1 face projector from the D/B/G construction; edge integrals of
    // linears are exact by the trapezoid rule.
    let exps = mono::exponents_2d(1);
    let mut d = DMatrix::zeros(nvf, 3);
    for i in 0..nvf {
        for (a, &e) in exps.iter().enumerate() {
            d[(i, a)] = mono::eval_2d(e, &ctr, hf, &flat[i]);
        }
    }
    let mut b = DMatrix::zeros(3, nvf);
    let mut perimeter = 0.0;
    for i in 0..nvf {
        perimeter += (flat[(i + 1) % nvf] - flat[i]).norm();
    }
    for i in 0..nvf {
        let j = (i + 1) % nvf;
        let e = flat[j] - flat[i];
        let len = e.norm();
        let n2 = nalgebra::Vector2::new(e.y, -e.x) / len;
        for &s in &[i, j] {
            b[(0, s)] += 0.5 * len / perimeter;
            b[(1, s)] += 0.5 * len * n2.x / hf;
            b[(2, s)] += 0.5 * len * n2.y / hf;
        }
    }
    let g = &b * &d;
    let pistar = g.lu().solve(&b).ok_or(Error::DegenerateElement { element: cell })?;

    // Integrals of the face monomials over the face.
    let rule = quadrature::polygon_rule(&flat, 2).ok_or_else(|| Error::QuadratureFailure {
        element: cell,
        reason: "face triangulation failed".into(),
    })?;
    let mut ints = [0.0f64; 3];
    for &(p, w) in &rule {
        for (a, &e) in exps.iter().enumerate() {
            ints[a] += w * mono::eval_2d(e, &ctr, hf, &p);
        }
    }
    let fint: Vec<f64> = (0..nvf)
        .map(|i| (0..3).map(|a| pistar[(a, i)] * ints[a]).sum())
        .collect();
    Ok((fint, area, normal))
}

pub(super) fn local_ops_3d(mesh: &Mesh3, cell: usize, k: usize) -> Result<LocalOperators> {
    if k != 1 {
        return Err(Error::UnsupportedOrder { k, dim: 3 });
    }
    let meas = mesh.measures(cell)?;
    let volume = meas.size;
    let h = meas.diameter;
    let c = meas.centroid;

    let vs = mesh.cell_vertices(cell);
    let n = vs.len();
    let local: HashMap<usize, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let exps = mono::exponents_3d(1);
    let nk = 4;

    let cycles: Vec<Vec<usize>> = (0..mesh.cells[cell].len()).map(|i| mesh.oriented_face(cell, i)).collect();

    let mut bm = DMatrix::zeros(nk, n);
    let mut e3 = [DMatrix::zeros(1, n), DMatrix::zeros(1, n), DMatrix::zeros(1, n)];
    let mut total_area = 0.0;
    let mut fints = Vec::with_capacity(cycles.len());
    for cycle in &cycles {
        let (fint, area, normal) = face_integrals(mesh, cell, cycle)?;
        total_area += area;
        for (pos, &v) in cycle.iter().enumerate() {
            let i = local[&v];
            for d in 0..3 {
                bm[(1 + d, i)] += normal[d] / h * fint[pos];
                e3[d][(0, i)] += normal[d] * fint[pos];
            }
        }
        fints.push(fint);
    }
    for (cycle, fint) in cycles.iter().zip(&fints) {
        for (pos, &v) in cycle.iter().enumerate() {
            bm[(0, local[&v])] += fint[pos] / total_area;
        }
    }

    let mut d = DMatrix::zeros(n, nk);
    for (i, &v) in vs.iter().enumerate() {
        for (a, &e) in exps.iter().enumerate() {
            d[(i, a)] = mono::eval_3d(e, &c, h, &mesh.vertices[v]);
        }
    }

    let g = &bm * &d;
    let pinabla_star = g.lu().solve(&bm).ok_or(Error::DegenerateElement { element: cell })?;
    let pinabla_dof = &d * &pinabla_star;

    let quad = quadrature::cell_rule(&mesh.vertices, &cycles, &c, 2 * k + 2).ok_or_else(|| {
        Error::QuadratureFailure { element: cell, reason: "cell triangulation failed".into() }
    })?;
    let mut hm = DMatrix::zeros(nk, nk);
    for &(p, w) in &quad {
        let vals: Vec<f64> = exps.iter().map(|&e| mono::eval_3d(e, &c, h, &p)).collect();
        for a in 0..nk {
            for b in 0..nk {
                hm[(a, b)] += w * vals[a] * vals[b];
            }
        }
    }

    // At order 1 every moment comes from the enhanced space, so the L2
    // projector coincides with the H1 one.
    let pi0_star = pinabla_star.clone();
    let cm = &hm * &pinabla_star;

    let grad_star: Vec<DMatrix<f64>> = e3.iter().map(|e| e / volume).collect();
    let mut stiffness: DMatrix<f64> =
        e3.iter().fold(DMatrix::zeros(n, n), |acc, e| acc + e.transpose() * e) / volume;
    let comp = DMatrix::identity(n, n) - &pinabla_dof;
    stiffness += comp.transpose() * &comp;
    symmetrize(&mut stiffness);

    let mut mass = cm.transpose() * &pi0_star;
    mass += volume * comp.transpose() * &comp;
    symmetrize(&mut mass);

    Ok(LocalOperators {
        n_dofs: n,
        dim: 3,
        k,
        measure: volume,
        diameter: h,
        centroid: c,
        stiffness,
        mass,
        pi0_star,
        grad_star,
        pinabla_star,
        pinabla_dof,
        // The order-1 monomial basis stays well conditioned, so no change
        // of basis is applied in 3D.
        coeffs: DMatrix::identity(4, 4),
        basis: d,
        quad,
    })
}
