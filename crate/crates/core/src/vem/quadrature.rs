//! Numerical quadrature: Gauss-Legendre rules on segments, Grundmann-Moller
//! rules on triangles and tetrahedra, and composite rules on polygons
//! (ear-clipping) and polytopal cells (signed tetrahedral fan from the
//! centroid, which integrates polynomials exactly even on non-star-shaped
//! cells because the signed volumes telescope).

use nalgebra::{Point2, Point3};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence. Nodes ascend.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.reverse(); // ascending nodes
    out
}

/// Legendre P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Grundmann-Moller rule of degree 2s+1 on the unit n-simplex
/// {x: x_i >= 0, sum x <= 1}, as (coordinates, weight) pairs integrating
/// dx (weights sum to 1/n!). Some weights are negative by construction.
pub fn grundmann_moller(n: usize, s: usize) -> Vec<(Vec<f64>, f64)> {
    let d = 2 * s + 1;
    let mut rule = Vec::new();
    for i in 0..=s {
        // weight = (-1)^i 2^(-2s) (d + n - 2i)^d / (i! (d + n - i)!)
        let mut w = if i % 2 == 0 { 1.0 } else { -1.0 } * 2.0f64.powi(-2 * s as i32);
        let base = (d + n - 2 * i) as f64;
        for _ in 0..d {
            w *= base;
        }
        for j in 1..=i {
            w /= j as f64;
        }
        for j in 1..=(d + n - i) {
            w /= j as f64;
        }
        for beta in compositions(s - i, n + 1) {
            let denom = (d + n - 2 * i) as f64;
            let x: Vec<f64> = (1..=n).map(|j| (2 * beta[j] + 1) as f64 / denom).collect();
            rule.push((x, w));
        }
    }
    rule
}

/// All length-`parts` vectors of non-negative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(total: usize, idx: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if idx + 1 == cur.len() {
            cur[idx] = total;
            out.push(cur.clone());
            return;
        }
        for v in 0..=total {
            cur[idx] = v;
            rec(total - v, idx + 1, cur, out);
        }
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

fn gm_order(degree: usize) -> usize {
    degree / 2 // 2s+1 >= degree
}

/// Quadrature of the given polynomial degree on a triangle.
pub fn triangle_rule(
    a: &Point2<f64>,
    b: &Point2<f64>,
    c: &Point2<f64>,
    degree: usize,
) -> Vec<(Point2<f64>, f64)> {
    let area2 = ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs();
    grundmann_moller(2, gm_order(degree))
        .into_iter()
        .map(|(x, w)| {
            let p = Point2::new(
                a.x + x[0] * (b.x - a.x) + x[1] * (c.x - a.x),
                a.y + x[0] * (b.y - a.y) + x[1] * (c.y - a.y),
            );
            (p, w * area2)
        })
        .collect()
}

/// Quadrature of the given degree on a tetrahedron; the weight carries the
/// sign of the tet orientation, enabling signed decompositions.
pub fn tet_rule(
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
    d: &Point3<f64>,
    degree: usize,
) -> Vec<(Point3<f64>, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let e3 = d - a;
    let det = e1.dot(&e2.cross(&e3)); // 6 * signed volume
    grundmann_moller(3, gm_order(degree))
        .into_iter()
        .map(|(x, w)| {
            let p = a + e1 * x[0] + e2 * x[1] + e3 * x[2];
            (p, w * det)
        })
        .collect()
}

/// Composite rule over a simple polygon via ear-clipping triangulation.
/// None when ear-clipping fails (degenerate polygon).
pub fn polygon_rule(poly: &[Point2<f64>], degree: usize) -> Option<Vec<(Point2<f64>, f64)>> {
    let tris = crate::geometry::ear_clip(poly)?;
    let mut out = Vec::new();
    for [i, j, k] in tris {
        out.extend(triangle_rule(&poly[i], &poly[j], &poly[k], degree));
    }
    Some(out)
}

/// Planar coordinates of a 3D face cycle in an orthonormal basis of its
/// Newell-normal plane. Index order is preserved and the result is CCW when
/// seen from the side the Newell normal points to.
pub fn flatten_cycle(vertices: &[Point3<f64>], cycle: &[usize]) -> Vec<Point2<f64>> {
    let n = newell_normal(vertices, cycle);
    let mut u = n.cross(&nalgebra::Vector3::x());
    if u.norm() < 1e-9 * n.norm() {
        u = n.cross(&nalgebra::Vector3::y());
    }
    let u = u.normalize();
    let w = n.normalize().cross(&u);
    let origin = vertices[cycle[0]].coords;
    cycle
        .iter()
        .map(|&v| {
            let d = vertices[v].coords - origin;
            Point2::new(d.dot(&u), d.dot(&w))
        })
        .collect()
}

/// Area-weighted normal of a (possibly non-planar) 3D cycle.
pub fn newell_normal(vertices: &[Point3<f64>], cycle: &[usize]) -> nalgebra::Vector3<f64> {
    let mut n = nalgebra::Vector3::zeros();
    for i in 0..cycle.len() {
        let a = vertices[cycle[i]].coords;
        let b = vertices[cycle[(i + 1) % cycle.len()]].coords;
        n += a.cross(&b);
    }
    0.5 * n
}

/// Triangulates a 3D face cycle by ear-clipping its planar projection;
/// returned triples index into `cycle`.
pub fn triangulate_cycle(vertices: &[Point3<f64>], cycle: &[usize]) -> Option<Vec<[usize; 3]>> {
    let flat = flatten_cycle(vertices, cycle);
    crate::geometry::ear_clip(&flat)
}

/// Composite rule over a 3D cell given by outward-oriented face cycles: a
/// signed tetrahedral fan from `apex` over the ear-clipped faces. Exact for
/// polynomials even when the apex is outside the cell, since the signed
/// volumes telescope.
pub fn cell_rule(
    vertices: &[Point3<f64>],
    faces: &[Vec<usize>],
    apex: &Point3<f64>,
    degree: usize,
) -> Option<Vec<(Point3<f64>, f64)>> {
    let mut out = Vec::new();
    for cycle in faces {
        for [i, j, k] in triangulate_cycle(vertices, cycle)? {
            out.extend(tet_rule(
                apex,
                &vertices[cycle[i]],
                &vertices[cycle[j]],
                &vertices[cycle[k]],
                degree,
            ));
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=8 {
            let rule = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
                assert_relative_eq!(approx, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn grundmann_moller_triangle_exactness() {
        // int over unit triangle of x^a y^b = a! b! / (a+b+2)!.
        for s in 0..=4usize {
            let rule = grundmann_moller(2, s);
            let degree = 2 * s + 1;
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let approx: f64 = rule
                        .iter()
                        .map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert_relative_eq!(approx, exact, epsilon = 1e-12, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn grundmann_moller_tet_exactness() {
        for s in 0..=3usize {
            let rule = grundmann_moller(3, s);
            let degree = 2 * s + 1;
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    for c in 0..=(degree - a - b) {
                        let approx: f64 = rule
                            .iter()
                            .map(|(x, w)| {
                                w * x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
                            })
                            .sum();
                        let exact =
                            factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                        assert_relative_eq!(approx, exact, epsilon = 1e-12, max_relative = 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn lshape_polygon_area_and_moments() {
        let poly: Vec<Point2<f64>> = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
            .iter()
            .map(|&(x, y)| Point2::new(x, y))
            .collect();
        let rule = polygon_rule(&poly, 3).unwrap();
        let area: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_relative_eq!(area, 3.0, epsilon = 1e-12);
        // int x over the L-shape: 2x1 rectangle gives 2, 1x1 top square 0.5.
        let ix: f64 = rule.iter().map(|&(p, w)| w * p.x).sum();
        assert_relative_eq!(ix, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn cell_rule_on_cube_with_external_apex() {
        let m = crate::mesh::mesh3::tests::unit_cube();
        let faces: Vec<Vec<usize>> = (0..6).map(|i| m.oriented_face(0, i)).collect();
        // Identity map on cycles for the rule input.
        let cycles: Vec<Vec<usize>> = faces.clone();
        // Apex deliberately outside: signed fan must still integrate exactly.
        let apex = Point3::new(5.0, -3.0, 2.0);
        let rule = cell_rule(&m.vertices, &cycles, &apex, 2).unwrap();
        let vol: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_relative_eq!(vol, 1.0, epsilon = 1e-11);
        let ixx: f64 = rule.iter().map(|&(p, w)| w * p.x * p.x).sum();
        assert_relative_eq!(ixx, 1.0 / 3.0, epsilon = 1e-11);
        let ixy: f64 = rule.iter().map(|&(p, w)| w * p.x * p.y).sum();
        assert_relative_eq!(ixy, 0.25, epsilon = 1e-11);
    }
}
