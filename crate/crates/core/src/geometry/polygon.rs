use nalgebra::{Point2, Point3};

use super::KernelRegion;
use crate::config::{EPS_GEO, KERNEL_SLIVER_FRACTION};

/// Partition of a polygon's boundary edges into maximal runs of consecutive
/// collinear edges (wrapping around the starting vertex). Edge `i` joins
/// vertex `i` to vertex `i + 1` of the polygon.
#[derive(Debug, Clone)]
pub struct EdgeChains {
    pub chains: Vec<Vec<usize>>,
}

pub fn polygon_area(poly: &[Point2<f64>]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

pub fn polygon_diameter(poly: &[Point2<f64>]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..poly.len() {
        for j in (i + 1)..poly.len() {
            d = d.max((poly[i] - poly[j]).norm());
        }
    }
    d
}

/// Kernel of a simple CCW polygon by incremental half-plane clipping.
///
/// Each directed edge contributes the half-plane on its interior (left)
/// side; the running intersection starts from the polygon's bounding box.
/// Slivers below `KERNEL_SLIVER_FRACTION * |P|` are reported as empty.
pub fn polygon_kernel(poly: &[Point2<f64>]) -> KernelRegion {
    let n = poly.len();
    let area = polygon_area(poly);
    debug_assert!(area > 0.0, "polygon must be CCW");
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = 1e-9 * ((hi - lo).norm() + 1.0);
    let mut region = vec![
        Point2::new(lo.x - pad, lo.y - pad),
        Point2::new(hi.x + pad, lo.y - pad),
        Point2::new(hi.x + pad, hi.y + pad),
        Point2::new(lo.x - pad, hi.y + pad),
    ];
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        region = clip_left_of(&region, &a, &b);
        if region.len() < 3 {
            return KernelRegion::empty(2);
        }
    }
    let measure = polygon_area(&region);
    if measure < KERNEL_SLIVER_FRACTION * area {
        return KernelRegion::empty(2);
    }
    KernelRegion {
        dim: 2,
        vertices: region.into_iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect(),
        measure,
    }
}

/// Sutherland-Hodgman clip of a convex region against the left side of a->b.
fn clip_left_of(region: &[Point2<f64>], a: &Point2<f64>, b: &Point2<f64>) -> Vec<Point2<f64>> {
    let d = b - a;
    let side = |p: &Point2<f64>| d.x * (p.y - a.y) - d.y * (p.x - a.x);
    let mut out = Vec::with_capacity(region.len() + 1);
    let n = region.len();
    for i in 0..n {
        let p = region[i];
        let q = region[(i + 1) % n];
        let sp = side(&p);
        let sq = side(&q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            out.push(Point2::from(p.coords + t * (q.coords - p.coords)));
        }
    }
    out
}

/// Groups consecutive boundary edges into maximal collinear runs.
///
/// Successive edges belong to the same chain while their unit directions
/// stay parallel (|cross| below tolerance, positive dot); the run through
/// the starting vertex wraps around.
pub fn collinear_chains(poly: &[Point2<f64>]) -> EdgeChains {
    let n = poly.len();
    let dir = |i: usize| {
        let d = poly[(i + 1) % n] - poly[i];
        d / d.norm()
    };
    // Unit directions make the cross product a pure angle test; the element
    // scale is already divided out, so compare against a fixed multiple of
    // the relative tolerance.
    let tol = 1e4 * EPS_GEO;
    let collinear = |i: usize, j: usize| {
        let (u, v) = (dir(i), dir(j));
        (u.x * v.y - u.y * v.x).abs() <= tol && u.dot(&v) > 0.0
    };
    let mut breaks: Vec<usize> = (0..n).filter(|&i| !collinear((i + n - 1) % n, i)).collect();
    if breaks.is_empty() {
        // Fully collinear boundary is degenerate; treat as one chain.
        return EdgeChains { chains: vec![(0..n).collect()] };
    }
    let mut chains = Vec::with_capacity(breaks.len());
    breaks.push(breaks[0] + n);
    for w in breaks.windows(2) {
        chains.push((w[0]..w[1]).map(|i| i % n).collect());
    }
    EdgeChains { chains }
}

/// Ear-clipping triangulation of a simple CCW polygon. Returns vertex-index
/// triples into `poly`.
pub fn ear_clip(poly: &[Point2<f64>]) -> Option<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let cross = |a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>| {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    };
    let scale = polygon_diameter(poly);
    let eps = EPS_GEO * scale * scale;
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (&poly[ia], &poly[ib], &poly[ic]);
            let conv = cross(a, b, c);
            if conv <= eps {
                continue; // reflex or degenerate corner
            }
            // Ear test: no other remaining vertex strictly inside.
            let mut ok = true;
            for &j in &idx {
                if j == ia || j == ib || j == ic {
                    continue;
                }
                let p = &poly[j];
                if cross(a, b, p) >= -eps && cross(b, c, p) >= -eps && cross(c, a, p) >= -eps {
                    ok = false;
                    break;
                }
            }
            if ok {
                tris.push([ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            guard += 1;
            if guard > 2 {
                return None;
            }
            // Retry with degenerate (zero-area) ears allowed.
            for i in 0..idx.len() {
                let m = idx.len();
                let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
                if cross(&poly[ia], &poly[ib], &poly[ic]).abs() <= eps {
                    idx.remove(i);
                    clipped = true;
                    break;
                }
            }
            if !clipped {
                return None;
            }
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Some(tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2<f64>> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    pub fn unit_square() -> Vec<Point2<f64>> {
        pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    /// Non-star-shaped U: no point sees both arms.
    pub fn u_polygon() -> Vec<Point2<f64>> {
        pts(&[
            (0.0, 0.0),
            (3.0, 0.0),
            (3.0, 3.0),
            (2.0, 3.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 3.0),
            (0.0, 3.0),
        ])
    }

    pub fn l_hexagon() -> Vec<Point2<f64>> {
        pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])
    }

    #[test]
    fn kernel_of_convex_polygon_is_the_polygon() {
        let k = polygon_kernel(&unit_square());
        assert_relative_eq!(k.measure, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn kernel_of_u_polygon_is_empty() {
        let k = polygon_kernel(&u_polygon());
        assert!(k.is_empty());
    }

    #[test]
    fn kernel_of_l_hexagon_is_the_unit_square() {
        // Brute-force half-plane intersection by hand gives [0,1]^2.
        let k = polygon_kernel(&l_hexagon());
        assert_relative_eq!(k.measure, 1.0, epsilon = 1e-10);
        let area = polygon_area(&l_hexagon());
        assert_relative_eq!(k.measure / area, 1.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn square_has_four_single_edge_chains() {
        let ch = collinear_chains(&unit_square());
        assert_eq!(ch.chains.len(), 4);
        assert!(ch.chains.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn hanging_midpoint_joins_the_bottom_chain() {
        let poly = pts(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let ch = collinear_chains(&poly);
        assert_eq!(ch.chains.len(), 4);
        let bottom = ch.chains.iter().find(|c| c.len() == 2).unwrap();
        assert_eq!(bottom, &vec![0, 1]);
    }

    #[test]
    fn quarter_split_bottom_chain_ratio() {
        let poly = pts(&[(0.0, 0.0), (0.25, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let ch = collinear_chains(&poly);
        let bottom = ch.chains.iter().find(|c| c.len() == 2).unwrap();
        let len = |e: usize| (poly[(e + 1) % poly.len()] - poly[e]).norm();
        let (a, b) = (len(bottom[0]), len(bottom[1]));
        assert_relative_eq!(a.min(b) / a.max(b), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn chains_wrap_around_the_starting_vertex() {
        // Hanging vertex at the start of the cycle: edges n-1 and 0 are
        // collinear and must share a chain.
        let poly = pts(&[(0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)]);
        let ch = collinear_chains(&poly);
        assert_eq!(ch.chains.len(), 4);
        assert!(ch.chains.iter().any(|c| c.contains(&4) && c.contains(&0)));
    }

    #[test]
    fn ear_clip_u_polygon() {
        let poly = u_polygon();
        let tris = ear_clip(&poly).unwrap();
        assert_eq!(tris.len(), poly.len() - 2);
        let total: f64 = tris
            .iter()
            .map(|t| {
                let (a, b, c) = (poly[t[0]], poly[t[1]], poly[t[2]]);
                0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
            })
            .sum();
        assert_relative_eq!(total, polygon_area(&poly), epsilon = 1e-12);
    }

    /// Visibility-sampling oracle: fraction of a large sample of interior
    /// points that see every boundary vertex and edge midpoint.
    pub fn kernel_measure_sampled(poly: &[Point2<f64>], samples: usize) -> f64 {
        let (mut lo, mut hi) = (poly[0], poly[0]);
        for p in poly {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let mut rng = crate::rng::SplitMix64::new(0xbeef);
        let mut hits = 0usize;
        for _ in 0..samples {
            let p = Point2::new(rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y));
            if sees_whole_boundary(poly, &p) {
                hits += 1;
            }
        }
        (hi.x - lo.x) * (hi.y - lo.y) * hits as f64 / samples as f64
    }

    fn sees_whole_boundary(poly: &[Point2<f64>], p: &Point2<f64>) -> bool {
        // p is in the kernel iff it lies on the interior side of every edge.
        let n = poly.len();
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let d = b - a;
            if d.x * (p.y - a.y) - d.y * (p.x - a.x) < 0.0 {
                return false;
            }
        }
        true
    }

    #[test]
    fn u_polygon_fails_sampled_visibility() {
        // Rejection sampling over 1e5 points finds no kernel point.
        assert_eq!(kernel_measure_sampled(&u_polygon(), 100_000), 0.0);
    }

    #[test]
    fn l_hexagon_kernel_matches_sampling_oracle() {
        let sampled = kernel_measure_sampled(&l_hexagon(), 100_000);
        let k = polygon_kernel(&l_hexagon());
        assert!((sampled - k.measure).abs() / k.measure < 0.02);
    }

    proptest! {
        #[test]
        fn kernel_never_exceeds_polygon_area(seed in 0u64..500) {
            let poly = random_simple_polygon(seed);
            let k = polygon_kernel(&poly);
            let area = polygon_area(&poly);
            prop_assert!(k.measure <= area * (1.0 + 1e-9));
        }

        #[test]
        fn chains_cover_all_edges(seed in 0u64..500) {
            let poly = random_simple_polygon(seed);
            let ch = collinear_chains(&poly);
            let total: usize = ch.chains.iter().map(|c| c.len()).sum();
            prop_assert_eq!(total, poly.len());
            let mut all: Vec<usize> = ch.chains.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..poly.len()).collect::<Vec<_>>());
        }
    }

    /// Random star-shaped-or-not simple polygon: jittered radial vertices.
    pub fn random_simple_polygon(seed: u64) -> Vec<Point2<f64>> {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let n = 3 + rng.below(10);
        let mut poly = Vec::with_capacity(n);
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.3 * rng.next_f64()) / n as f64;
            let r = 0.2 + 0.8 * rng.next_f64();
            poly.push(Point2::new(r * th.cos(), r * th.sin()));
        }
        poly
    }
}
