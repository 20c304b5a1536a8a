//! Sparse symmetric linear algebra: CSR storage, fill-reducing nested
//! dissection ordering, an LDL^T factorization in the style of compressed
//! sparse column solvers, and a Jacobi-preconditioned CG fallback.

use crate::{Error, Result};

/// Symmetric sparse matrix in CSR with both triangles stored.
#[derive(Debug, Clone)]
pub struct SparseSym {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl SparseSym {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// both (i, j) and (j, i) must be present or the matrix symmetrized by
    /// the caller. Entries below `drop_tol` in magnitude after summing are
    /// kept (structural zeros are fine).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut data: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indptr[i + 1] += 1;
                indices.push(j);
                data.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Self { n, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[p] * x[self.indices[p]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for p in self.indptr[i]..self.indptr[i + 1] {
                if self.indices[p] == i {
                    d[i] = self.data[p];
                }
            }
        }
        d
    }
}

/// Fill-reducing ordering by recursive BFS level-set dissection: split the
/// graph at the middle BFS level from a pseudo-peripheral vertex, order the
/// two halves recursively and the separator last.
pub fn nested_dissection(a: &SparseSym) -> Vec<usize> {
    let nodes: Vec<usize> = (0..a.n).collect();
    let mut perm = Vec::with_capacity(a.n);
    dissect(a, &nodes, &mut perm);
    perm
}

fn dissect(a: &SparseSym, nodes: &[usize], perm: &mut Vec<usize>) {
    if nodes.len() <= 32 {
        perm.extend_from_slice(nodes);
        return;
    }
    let in_set: std::collections::HashMap<usize, usize> =
        nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Pseudo-peripheral start: BFS from the first node, restart from the
    // farthest one.
    let levels = |start: usize| -> Vec<i32> {
        let mut lvl = vec![-1i32; nodes.len()];
        lvl[in_set[&start]] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let lv = lvl[in_set[&v]];
            for p in a.indptr[v]..a.indptr[v + 1] {
                let u = a.indices[p];
                if let Some(&iu) = in_set.get(&u) {
                    if lvl[iu] < 0 {
                        lvl[iu] = lv + 1;
                        queue.push_back(u);
                    }
                }
            }
        }
        lvl
    };
    let l0 = levels(nodes[0]);
    if l0.iter().any(|&l| l < 0) {
        // Disconnected: dissect each connected component on its own (level
        // sets are not connected in general, so halves often split).
        let reached: Vec<usize> =
            (0..nodes.len()).filter(|&i| l0[i] >= 0).map(|i| nodes[i]).collect();
        let rest: Vec<usize> =
            (0..nodes.len()).filter(|&i| l0[i] < 0).map(|i| nodes[i]).collect();
        dissect(a, &reached, perm);
        dissect(a, &rest, perm);
        return;
    }
    let far = (0..nodes.len()).max_by_key(|&i| (l0[i], std::cmp::Reverse(i))).unwrap();
    let lvl = levels(nodes[far]);
    let max_lvl = lvl.iter().copied().max().unwrap_or(0);
    if max_lvl < 2 {
        // Tightly clustered: fall back to the given order.
        perm.extend_from_slice(nodes);
        return;
    }
    // Middle level by cumulative count.
    let mut count = vec![0usize; (max_lvl + 1) as usize];
    for &l in &lvl {
        count[l as usize] += 1;
    }
    let mut acc = 0;
    let mut mid = 1;
    for (l, &c) in count.iter().enumerate() {
        acc += c;
        if acc * 2 >= nodes.len() {
            mid = (l as i32).clamp(1, max_lvl - 1);
            break;
        }
    }
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut sep = Vec::new();
    for (i, &v) in nodes.iter().enumerate() {
        match lvl[i].cmp(&mid) {
            std::cmp::Ordering::Less => low.push(v),
            std::cmp::Ordering::Greater => high.push(v),
            std::cmp::Ordering::Equal => sep.push(v),
        }
    }
    if low.is_empty() || high.is_empty() {
        perm.extend_from_slice(nodes);
        return;
    }
    dissect(a, &low, perm);
    dissect(a, &high, perm);
    perm.extend_from_slice(&sep);
}

/// LDL^T factorization of a permutation of a symmetric matrix.
pub struct LdlFactor {
    n: usize,
    /// perm[k] = original index placed at position k.
    perm: Vec<usize>,
    /// Symmetric equilibration 1/sqrt(diag), applied around the factors.
    scale: Vec<f64>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

/// Factorizes with a nested dissection ordering. Fails with
/// `NotPositiveDefinite` on a zero or negative pivot.
pub fn factorize(a: &SparseSym) -> Result<LdlFactor> {
    let perm = nested_dissection(a);
    factorize_with(a, perm)
}

pub fn factorize_with(a: &SparseSym, perm: Vec<usize>) -> Result<LdlFactor> {
    let n = a.n;
    let mut iperm = vec![0usize; n];
    for (k, &v) in perm.iter().enumerate() {
        iperm[v] = k;
    }
    // Symmetric diagonal equilibration: factoring D^{-1/2} A D^{-1/2}
    // keeps the pivots near unit scale, which is what lets badly
    // conditioned (but definite) systems get through in floating point.
    let diag = a.diagonal();
    if diag.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let scale: Vec<f64> = diag.iter().map(|&v| 1.0 / v.sqrt()).collect();
    // Permuted upper triangle in CSC (columns k hold rows i <= k).
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for p in a.indptr[i]..a.indptr[i + 1] {
            let j = a.indices[p];
            let (pi, pj) = (iperm[i], iperm[j]);
            if pi <= pj {
                cols[pj].push((pi, a.data[p] * scale[i] * scale[j]));
            }
        }
    }
    for c in cols.iter_mut() {
        c.sort_unstable_by_key(|&(i, _)| i);
    }

    // Symbolic: elimination tree and column counts.
    let mut parent = vec![usize::MAX; n];
    let mut flag = vec![usize::MAX; n];
    let mut lnz = vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for &(i, _) in &cols[k] {
            let mut i = i;
            while i < k && flag[i] != k {
                if parent[i] == usize::MAX {
                    parent[i] = k;
                }
                lnz[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    let mut li = vec![0usize; lp[n]];
    let mut lx = vec![0.0f64; lp[n]];
    let mut d = vec![0.0f64; n];

    // Numeric sweep.
    let mut y = vec![0.0f64; n];
    let mut pattern = vec![0usize; n];
    let mut used = vec![0usize; n]; // entries filled so far per column
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        y[k] = 0.0;
        for &(i, v) in &cols[k] {
            y[i] += v;
            let mut len = 0;
            let mut i = i;
            while i < k && flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
            }
            while len > 0 {
                len -= 1;
                top -= 1;
                pattern[top] = pattern[len];
            }
        }
        let mut dk = y[k];
        y[k] = 0.0;
        for t in top..n {
            let j = pattern[t];
            let yj = y[j];
            y[j] = 0.0;
            let lkj = yj / d[j];
            for p in lp[j]..lp[j] + used[j] {
                y[li[p]] -= lx[p] * yj;
            }
            dk -= lkj * yj;
            let p = lp[j] + used[j];
            li[p] = k;
            lx[p] = lkj;
            used[j] += 1;
        }
        if dk <= 0.0 || !dk.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        d[k] = dk;
    }
    Ok(LdlFactor { n, perm, scale, lp, li, lx, d })
}

impl LdlFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[k] = b[self.perm[k]] * self.scale[self.perm[k]];
        }
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for k in 0..n {
            x[k] /= self.d[k];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[self.perm[k]] = x[k] * self.scale[self.perm[k]];
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.li.len()
    }

}

/// Jacobi-preconditioned conjugate gradient. Returns the solution and the
/// iteration count; fails with `NoConvergence` past `max_iter`.
pub fn pcg_jacobi(
    a: &SparseSym,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let dinv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(&r, &d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rel_tol * bnorm {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Direct solve, falling back to CG when the factorization hits a
/// non-positive pivot (e.g. from roundoff on poorly conditioned systems).
pub fn solve(a: &SparseSym, b: &[f64]) -> Result<Vec<f64>> {
    match factorize(a) {
        Ok(f) => Ok(f.solve(b)),
        Err(Error::NotPositiveDefinite) => {
            pcg_jacobi(a, b, 1e-12, 10 * a.n.max(100)).map(|(x, _)| x)
        }
        Err(e) => Err(e),
    }
}

/// Spectral condition number estimate: power iteration for the largest
/// eigenvalue, inverse iteration through the factorization for the
/// smallest.
pub fn condition_estimate(a: &SparseSym, factor: &LdlFactor) -> f64 {
    let n = a.n;
    let mut rng = crate::rng::SplitMix64::new(0x636f6e64);
    let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let mut w = vec![0.0; n];
    let mut lambda_max = 0.0;
    for _ in 0..200 {
        let nv = norm(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        a.matvec(&v, &mut w);
        let next = dot(&v, &w);
        if (next - lambda_max).abs() <= 1e-10 * next.abs() {
            lambda_max = next;
            break;
        }
        lambda_max = next;
        std::mem::swap(&mut v, &mut w);
    }
    let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let mut lambda_min = 0.0;
    for _ in 0..200 {
        let nv = norm(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        let w = factor.solve(&v);
        let rayleigh = dot(&v, &w); // approximates 1 / lambda_min
        let next = 1.0 / rayleigh;
        if (next - lambda_min).abs() <= 1e-10 * next.abs() {
            lambda_min = next;
            break;
        }
        lambda_min = next;
        v = w;
    }
    lambda_max / lambda_min
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// 1D Laplacian, tridiagonal (2, -1).
    fn laplacian_1d(n: usize) -> SparseSym {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSym::from_triplets(n, &t)
    }

    /// 2D 5-point Laplacian on an m x m grid.
    fn laplacian_2d(m: usize) -> SparseSym {
        let at = |i: usize, j: usize| j * m + i;
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                t.push((at(i, j), at(i, j), 4.0));
                if i + 1 < m {
                    t.push((at(i, j), at(i + 1, j), -1.0));
                    t.push((at(i + 1, j), at(i, j), -1.0));
                }
                if j + 1 < m {
                    t.push((at(i, j), at(i, j + 1), -1.0));
                    t.push((at(i, j + 1), at(i, j), -1.0));
                }
            }
        }
        SparseSym::from_triplets(m * m, &t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseSym::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.diagonal(), vec![3.0, 1.0]);
    }

    #[test]
    fn ldl_matches_dense_solve() {
        let a = laplacian_2d(6);
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = factorize(&a).unwrap().solve(&b);
        // Residual check.
        let mut r = vec![0.0; a.n];
        a.matvec(&x, &mut r);
        for i in 0..a.n {
            assert_relative_eq!(r[i], b[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn ldl_rejects_indefinite() {
        let a = SparseSym::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(factorize(&a), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn cg_agrees_with_direct() {
        let a = laplacian_2d(10);
        let b: Vec<f64> = (0..a.n).map(|i| ((i * 7 % 13) as f64) - 6.0).collect();
        let xd = factorize(&a).unwrap().solve(&b);
        let (xc, iters) = pcg_jacobi(&a, &b, 1e-12, 10 * a.n).unwrap();
        assert!(iters < 10 * a.n);
        for i in 0..a.n {
            assert_relative_eq!(xd[i], xc[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn permutation_round_trip() {
        let a = laplacian_2d(8);
        let perm = nested_dissection(&a);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..a.n).collect::<Vec<_>>());
        // Same solution regardless of ordering.
        let b: Vec<f64> = (0..a.n).map(|i| i as f64).collect();
        let x1 = factorize_with(&a, perm).unwrap().solve(&b);
        let x2 = factorize_with(&a, (0..a.n).collect()).unwrap().solve(&b);
        for i in 0..a.n {
            assert_relative_eq!(x1[i], x2[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn dissection_reduces_fill() {
        let a = laplacian_2d(30);
        let nd = factorize(&a).unwrap().nnz();
        let natural = factorize_with(&a, (0..a.n).collect()).unwrap().nnz();
        assert!(nd < natural, "nd fill {nd} vs natural {natural}");
    }

    #[test]
    fn condition_of_1d_laplacian() {
        // Eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n = 50;
        let a = laplacian_1d(n);
        let f = factorize(&a).unwrap();
        let cond = condition_estimate(&a, &f);
        let t = std::f64::consts::PI / (n as f64 + 1.0);
        let exact = (2.0 - 2.0 * (n as f64 * t).cos()) / (2.0 - 2.0 * t.cos());
        assert!((cond - exact).abs() <= 0.02 * exact, "cond {cond} vs {exact}");
    }
}
