//! Scaled monomial bases m_a(x) = ((x - c) / h)^a used by the projector
//! construction, in graded lexicographic order.

use nalgebra::{Point2, Point3, Vector2, Vector3};

/// dim P_k in `dim` space dimensions.
pub fn space_dim(dim: usize, k: isize) -> usize {
    if k < 0 {
        return 0;
    }
    let k = k as usize;
    match dim {
        2 => (k + 1) * (k + 2) / 2,
        3 => (k + 1) * (k + 2) * (k + 3) / 6,
        _ => unreachable!(),
    }
}

/// 2D exponents of degree <= k, graded: (0,0), (1,0), (0,1), (2,0), ...
pub fn exponents_2d(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(space_dim(2, k as isize));
    for d in 0..=k {
        for ay in 0..=d {
            out.push((d - ay, ay));
        }
    }
    out
}

/// 3D exponents of degree <= k, graded lexicographic.
pub fn exponents_3d(k: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(space_dim(3, k as isize));
    for d in 0..=k {
        for ax in (0..=d).rev() {
            for ay in (0..=(d - ax)).rev() {
                out.push((ax, ay, d - ax - ay));
            }
        }
    }
    out
}

fn powi(x: f64, e: usize) -> f64 {
    x.powi(e as i32)
}

/// Scaled 2D monomial value.
pub fn eval_2d(exp: (usize, usize), c: &Point2<f64>, h: f64, p: &Point2<f64>) -> f64 {
    powi((p.x - c.x) / h, exp.0) * powi((p.y - c.y) / h, exp.1)
}

/// Gradient of a scaled 2D monomial.
pub fn grad_2d(exp: (usize, usize), c: &Point2<f64>, h: f64, p: &Point2<f64>) -> Vector2<f64> {
    let xi = (p.x - c.x) / h;
    let eta = (p.y - c.y) / h;
    let gx = if exp.0 == 0 { 0.0 } else { exp.0 as f64 / h * powi(xi, exp.0 - 1) * powi(eta, exp.1) };
    let gy = if exp.1 == 0 { 0.0 } else { exp.1 as f64 / h * powi(xi, exp.0) * powi(eta, exp.1 - 1) };
    Vector2::new(gx, gy)
}

/// Scaled 3D monomial value.
pub fn eval_3d(exp: (usize, usize, usize), c: &Point3<f64>, h: f64, p: &Point3<f64>) -> f64 {
    powi((p.x - c.x) / h, exp.0) * powi((p.y - c.y) / h, exp.1) * powi((p.z - c.z) / h, exp.2)
}

/// Gradient of a scaled 3D monomial.
pub fn grad_3d(
    exp: (usize, usize, usize),
    c: &Point3<f64>,
    h: f64,
    p: &Point3<f64>,
) -> Vector3<f64> {
    let xi = (p.x - c.x) / h;
    let eta = (p.y - c.y) / h;
    let zeta = (p.z - c.z) / h;
    let f = |e: usize, a: f64, b: f64, g: f64| if e == 0 { 0.0 } else { e as f64 / h * powi(a, e - 1) * b * g };
    Vector3::new(
        f(exp.0, xi, powi(eta, exp.1), powi(zeta, exp.2)),
        f(exp.1, eta, powi(xi, exp.0), powi(zeta, exp.2)),
        f(exp.2, zeta, powi(xi, exp.0), powi(eta, exp.1)),
    )
}

/// Laplacian of a scaled 2D monomial expanded back in the same basis:
/// (coefficient, index of the lower-degree monomial) pairs.
pub fn laplacian_2d(exp: (usize, usize), h: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let (ax, ay) = exp;
    if ax >= 2 {
        out.push(((ax * (ax - 1)) as f64 / (h * h), index_2d((ax - 2, ay))));
    }
    if ay >= 2 {
        out.push(((ay * (ay - 1)) as f64 / (h * h), index_2d((ax, ay - 2))));
    }
    out
}

/// Position of a 2D exponent in the graded ordering.
pub fn index_2d(exp: (usize, usize)) -> usize {
    let d = exp.0 + exp.1;
    d * (d + 1) / 2 + exp.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_index_agree() {
        let exps = exponents_2d(4);
        assert_eq!(exps[0], (0, 0));
        assert_eq!(exps[1], (1, 0));
        assert_eq!(exps[2], (0, 1));
        assert_eq!(exps[5], (0, 2));
        for (i, &e) in exps.iter().enumerate() {
            assert_eq!(index_2d(e), i);
        }
        assert_eq!(exps.len(), space_dim(2, 4));
        assert_eq!(exponents_3d(2).len(), space_dim(3, 2));
        assert_eq!(space_dim(2, -1), 0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let c = Point2::new(0.3, -0.2);
        let h = 0.7;
        let p = Point2::new(0.9, 0.4);
        let eps = 1e-6;
        for exp in exponents_2d(3) {
            let g = grad_2d(exp, &c, h, &p);
            let fx = (eval_2d(exp, &c, h, &Point2::new(p.x + eps, p.y))
                - eval_2d(exp, &c, h, &Point2::new(p.x - eps, p.y)))
                / (2.0 * eps);
            let fy = (eval_2d(exp, &c, h, &Point2::new(p.x, p.y + eps))
                - eval_2d(exp, &c, h, &Point2::new(p.x, p.y - eps)))
                / (2.0 * eps);
            assert!((g.x - fx).abs() < 1e-7, "{exp:?}");
            assert!((g.y - fy).abs() < 1e-7, "{exp:?}");
        }
        let c3 = Point3::new(0.1, 0.2, -0.3);
        let p3 = Point3::new(0.6, -0.4, 0.5);
        for exp in exponents_3d(2) {
            let g = grad_3d(exp, &c3, 1.3, &p3);
            let fd = |i: usize, s: f64| {
                let mut q = p3;
                q[i] += s * eps;
                eval_3d(exp, &c3, 1.3, &q)
            };
            for i in 0..3 {
                let d = (fd(i, 1.0) - fd(i, -1.0)) / (2.0 * eps);
                assert!((g[i] - d).abs() < 1e-7, "{exp:?} axis {i}");
            }
        }
    }

    #[test]
    fn laplacian_expansion() {
        // m = xi^3 eta: Laplacian = 6 xi eta / h^2.
        let terms = laplacian_2d((3, 1), 2.0);
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].1, index_2d((1, 1)));
        assert!((terms[0].0 - 1.5).abs() < 1e-15);
    }
}
