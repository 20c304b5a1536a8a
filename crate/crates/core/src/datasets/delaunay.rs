//! Incremental Bowyer-Watson Delaunay triangulation of points inside a
//! convex starting polygon (here: the unit square given by the first four
//! points). No super-triangle is needed since every inserted point lies
//! inside or on the boundary of the current triangulation; points exactly
//! on a hull edge split that edge.

use std::collections::HashMap;

use nalgebra::Point2;

#[derive(Clone)]
struct Tri {
    v: [usize; 3],
    /// Neighbor across the edge opposite vertex i, if any.
    nbr: [Option<usize>; 3],
    alive: bool,
}

fn orient(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Positive when d lies strictly inside the circumcircle of CCW (a, b, c).
fn in_circle(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>, d: &Point2<f64>) -> f64 {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let ad2 = adx * adx + ady * ady;
    let bd2 = bdx * bdx + bdy * bdy;
    let cd2 = cdx * cdx + cdy * cdy;
    adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2)
        + ad2 * (bdx * cdy - cdx * bdy)
}

/// Delaunay triangulation of `points`, whose first four entries must be the
/// CCW corners of a convex quadrilateral strictly containing all the others.
pub fn triangulate(points: &[Point2<f64>]) -> Vec<[usize; 3]> {
    assert!(points.len() >= 4);
    let mut tris = vec![
        Tri { v: [0, 1, 2], nbr: [None, Some(1), None], alive: true },
        Tri { v: [0, 2, 3], nbr: [None, None, Some(0)], alive: true },
    ];
    let mut last = 0usize;
    for p in 4..points.len() {
        last = insert(points, &mut tris, last, p);
    }
    tris.iter().filter(|t| t.alive).map(|t| t.v).collect()
}

fn locate(points: &[Point2<f64>], tris: &[Tri], start: usize, p: usize) -> usize {
    let mut t = start;
    for _ in 0..4 * tris.len() + 16 {
        let tri = &tris[t];
        let mut next = None;
        for j in 0..3 {
            let a = &points[tri.v[(j + 1) % 3]];
            let b = &points[tri.v[(j + 2) % 3]];
            if orient(a, b, &points[p]) < 0.0 {
                next = tri.nbr[j];
                break;
            }
        }
        match next {
            Some(n) => t = n,
            None => return t,
        }
    }
    // Fallback for pathological walks: linear scan.
    for (i, tri) in tris.iter().enumerate() {
        if !tri.alive {
            continue;
        }
        let inside = (0..3).all(|j| {
            let a = &points[tri.v[(j + 1) % 3]];
            let b = &points[tri.v[(j + 2) % 3]];
            orient(a, b, &points[p]) >= 0.0
        });
        if inside {
            return i;
        }
    }
    unreachable!("point outside the triangulated domain");
}

fn insert(points: &[Point2<f64>], tris: &mut Vec<Tri>, last: usize, p: usize) -> usize {
    let seed = locate(points, tris, last, p);
    // Grow the cavity of triangles whose circumcircle contains p.
    let mut bad = vec![seed];
    let mut in_bad: HashMap<usize, bool> = HashMap::new();
    in_bad.insert(seed, true);
    let mut i = 0;
    while i < bad.len() {
        let t = bad[i];
        i += 1;
        for j in 0..3 {
            if let Some(n) = tris[t].nbr[j] {
                if in_bad.contains_key(&n) {
                    continue;
                }
                let tv = tris[n].v;
                let contains = in_circle(
                    &points[tv[0]],
                    &points[tv[1]],
                    &points[tv[2]],
                    &points[p],
                ) > 0.0;
                in_bad.insert(n, contains);
                if contains {
                    bad.push(n);
                }
            }
        }
    }
    // Directed boundary edges of the cavity (interior on the left).
    let mut boundary: Vec<(usize, usize, Option<usize>)> = Vec::new();
    for &t in &bad {
        for j in 0..3 {
            let outside = match tris[t].nbr[j] {
                Some(n) => !in_bad[&n],
                None => true,
            };
            if outside {
                let a = tris[t].v[(j + 1) % 3];
                let b = tris[t].v[(j + 2) % 3];
                // A point exactly on a hull edge replaces that edge with
                // the chain a -> p -> b: skip the edge instead of fanning
                // a zero-area triangle over it.
                if tris[t].nbr[j].is_none() && orient(&points[a], &points[b], &points[p]) == 0.0 {
                    continue;
                }
                boundary.push((a, b, tris[t].nbr[j]));
            }
        }
    }
    for &t in &bad {
        tris[t].alive = false;
    }
    // Fan the cavity from p; link new triangles to each other and outward.
    let mut edge_map: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut created = Vec::with_capacity(boundary.len());
    for &(a, b, outside) in &boundary {
        let nt = tris.len();
        tris.push(Tri { v: [a, b, p], nbr: [None, None, outside], alive: true });
        if let Some(o) = outside {
            for j in 0..3 {
                let oa = tris[o].v[(j + 1) % 3];
                let ob = tris[o].v[(j + 2) % 3];
                if (oa, ob) == (b, a) {
                    tris[o].nbr[j] = Some(nt);
                }
            }
        }
        edge_map.insert((b, p), (nt, 0));
        edge_map.insert((p, a), (nt, 1));
        created.push(nt);
    }
    for &nt in &created {
        let [a, b, _] = tris[nt].v;
        if let Some(&(other, _)) = edge_map.get(&(p, b)) {
            tris[nt].nbr[0] = Some(other);
        }
        if let Some(&(other, _)) = edge_map.get(&(a, p)) {
            tris[nt].nbr[1] = Some(other);
        }
    }
    created[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn square_corners() -> Vec<Point2<f64>> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn corners_only_two_triangles() {
        let t = triangulate(&square_corners());
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn euler_count_and_empty_circumcircles() {
        let mut points = square_corners();
        let mut rng = SplitMix64::new(9);
        for _ in 0..100 {
            points.push(Point2::new(rng.next_f64(), rng.next_f64()));
        }
        let tris = triangulate(&points);
        // All interior points stay off the hull, so T = 2P - 2 - 4.
        assert_eq!(tris.len(), 2 * points.len() - 6);
        // Brute-force Delaunay property over all point-triangle pairs.
        for t in &tris {
            for (i, p) in points.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                let v = in_circle(&points[t[0]], &points[t[1]], &points[t[2]], p);
                assert!(v <= 1e-9, "point {i} inside circumcircle of {t:?}: {v}");
            }
        }
        // Positive orientation and full area coverage.
        let total: f64 = tris
            .iter()
            .map(|t| 0.5 * orient(&points[t[0]], &points[t[1]], &points[t[2]]))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
