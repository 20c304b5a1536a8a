//! Multilevel K-way graph partitioner for the weighted dual graph.
//!
//! Pipeline: heavy-edge-matching coarsening, greedy region growing on the
//! coarsest graph from farthest-first seeds, boundary Fiduccia-Mattheyses
//! style refinement on every level during uncoarsening, then a contiguity
//! pass that reunites fragmented parts. Balance is kept on node weights,
//! the objective is the total weight of cut arcs. Fully deterministic for a
//! given seed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dual::DualGraph;
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PartitionOptions {
    /// Allowed relative part-weight excess over the perfect average.
    pub imbalance_tol: f64,
    /// Refinement passes per level.
    pub refine_passes: usize,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self { imbalance_tol: 0.03, refine_passes: 8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionLabels {
    /// Part of each node, in 0..k_actual.
    pub labels: Vec<usize>,
    pub k_requested: usize,
    /// Non-empty parts after contiguity enforcement.
    pub k_actual: usize,
    /// Total integer weight of cut arcs.
    pub cut: i64,
    /// Heaviest part weight divided by the average part weight.
    pub imbalance: f64,
    /// Set when no labeling within the balance bound was achieved.
    pub infeasible_balance: bool,
}

/// Number of parts from the optimization parameter kappa, a percentage of
/// the element count: K = round(kappa * n / 100), at least 1.
pub fn compute_k(n_elements: usize, kappa: f64) -> usize {
    ((kappa * n_elements as f64 / 100.0).round() as usize).max(1)
}

/// Adjacency-list graph used internally by the multilevel scheme. Parallel
/// arcs created by contraction are aggregated.
struct Graph {
    node_w: Vec<i64>,
    adj: Vec<Vec<(usize, i64)>>,
}

impl Graph {
    fn len(&self) -> usize {
        self.node_w.len()
    }

    fn total_weight(&self) -> i64 {
        self.node_w.iter().sum()
    }

    fn max_node_weight(&self) -> i64 {
        self.node_w.iter().copied().max().unwrap_or(0)
    }

    fn from_dual(dual: &DualGraph) -> Self {
        let n = dual.num_nodes();
        let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for arc in &dual.arcs {
            adj[arc.a].push((arc.b, arc.iweight));
            adj[arc.b].push((arc.a, arc.iweight));
        }
        Self { node_w: dual.node_iweights.clone(), adj }
    }
}

/// One heavy-edge matching contraction. Returns the coarse graph and the
/// fine-to-coarse node map.
fn coarsen(g: &Graph, rng: &mut SplitMix64) -> (Graph, Vec<usize>) {
    let n = g.len();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        order.swap(i, j);
    }
    let mut mate = vec![usize::MAX; n];
    for &v in &order {
        if mate[v] != usize::MAX {
            continue;
        }
        let mut best: Option<(i64, usize)> = None;
        for &(u, w) in &g.adj[v] {
            if mate[u] != usize::MAX {
                continue;
            }
            let better = match best {
                None => true,
                Some((bw, bu)) => w > bw || (w == bw && u < bu),
            };
            if better {
                best = Some((w, u));
            }
        }
        match best {
            Some((_, u)) => {
                mate[v] = u;
                mate[u] = v;
            }
            None => mate[v] = v,
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut nc = 0;
    for v in 0..n {
        if map[v] != usize::MAX {
            continue;
        }
        map[v] = nc;
        map[mate[v]] = nc;
        nc += 1;
    }
    let mut node_w = vec![0i64; nc];
    for v in 0..n {
        node_w[map[v]] += g.node_w[v];
    }
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); nc];
    let mut agg: HashMap<(usize, usize), i64> = HashMap::new();
    for v in 0..n {
        for &(u, w) in &g.adj[v] {
            if v < u {
                let (cv, cu) = (map[v], map[u]);
                if cv != cu {
                    *agg.entry((cv.min(cu), cv.max(cu)), ).or_insert(0) += w;
                }
            }
        }
    }
    let mut pairs: Vec<((usize, usize), i64)> = agg.into_iter().collect();
    pairs.sort_unstable_by_key(|&(k, _)| k);
    for ((a, b), w) in pairs {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    (Graph { node_w, adj }, map)
}

/// Farthest-first seed selection by unweighted BFS hop distance.
fn pick_seeds(g: &Graph, k: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let n = g.len();
    let mut seeds = vec![rng.below(n)];
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    let relax_from = |s: usize, dist: &mut Vec<usize>, queue: &mut std::collections::VecDeque<usize>| {
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &g.adj[v] {
                if dist[v] + 1 < dist[u] {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
    };
    relax_from(seeds[0], &mut dist, &mut queue);
    while seeds.len() < k.min(n) {
        let mut best = usize::MAX;
        let mut best_d = 0;
        for v in 0..n {
            let d = dist[v];
            if d != usize::MAX && d > best_d || (d == best_d && v < best && d > 0) {
                best_d = d;
                best = v;
            }
        }
        if best == usize::MAX || best_d == 0 {
            // Graph exhausted (or disconnected remainder); fill with the
            // lowest unused indices.
            for v in 0..n {
                if !seeds.contains(&v) {
                    seeds.push(v);
                    if seeds.len() == k.min(n) {
                        break;
                    }
                }
            }
            break;
        }
        seeds.push(best);
        relax_from(best, &mut dist, &mut queue);
    }
    seeds
}

/// Greedy region growing: the lightest active part absorbs the frontier
/// node most strongly connected to it, under the weight cap. Frontier
/// candidates live in per-part lazy max-heaps; parts are ordered by a lazy
/// min-heap on their weight, so every step is logarithmic.
fn initial_partition(g: &Graph, k: usize, cap: i64, rng: &mut SplitMix64) -> Vec<usize> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = g.len();
    let mut labels = vec![usize::MAX; n];
    if k >= n {
        for v in 0..n {
            labels[v] = v;
        }
        return labels;
    }
    let seeds = pick_seeds(g, k, rng);
    let mut part_w = vec![0i64; k];
    let mut assigned = 0usize;
    // connection[v][p] tracked sparsely: for each unassigned node, total arc
    // weight to each part it touches.
    let mut conn: Vec<HashMap<usize, i64>> = vec![HashMap::new(); n];
    // Per-part frontier candidates (conn weight, node), popped lazily: an
    // entry is valid only while the node is unassigned and the weight is its
    // current connection to the part.
    let mut frontier: Vec<BinaryHeap<(i64, Reverse<usize>)>> = vec![BinaryHeap::new(); k];
    // Parts by (weight, index), smallest first; entries go stale when the
    // part grows. A part not in the queue is dormant (its best candidate was
    // blocked by the cap, or its frontier was empty) and wakes up when a new
    // candidate arrives.
    let mut part_q: BinaryHeap<Reverse<(i64, usize)>> = BinaryHeap::new();
    let mut queued = vec![false; k];

    let grow = |p: usize,
                v: usize,
                labels: &mut [usize],
                part_w: &mut [i64],
                assigned: &mut usize,
                conn: &mut [HashMap<usize, i64>],
                frontier: &mut [BinaryHeap<(i64, Reverse<usize>)>],
                part_q: &mut BinaryHeap<Reverse<(i64, usize)>>,
                queued: &mut [bool]| {
        labels[v] = p;
        part_w[p] += g.node_w[v];
        *assigned += 1;
        conn[v].clear();
        for &(u, w) in &g.adj[v] {
            if labels[u] == usize::MAX {
                let c = conn[u].entry(p).or_insert(0);
                *c += w;
                frontier[p].push((*c, Reverse(u)));
                if !queued[p] {
                    queued[p] = true;
                    part_q.push(Reverse((part_w[p], p)));
                }
            }
        }
    };

    for (p, &s) in seeds.iter().enumerate() {
        grow(p, s, &mut labels, &mut part_w, &mut assigned, &mut conn, &mut frontier, &mut part_q, &mut queued);
    }
    let mut cursor = 0usize; // lowest possibly-unassigned node
    while assigned < n {
        let Some(Reverse((w_p, p))) = part_q.pop() else {
            // No part can grow: caps everywhere or isolated remainder. Give
            // the lowest unassigned node to its best-connected part with
            // room, else to the lightest part overall.
            while labels[cursor] != usize::MAX {
                cursor += 1;
            }
            let v = cursor;
            let p = conn[v]
                .iter()
                .filter(|&(&p, _)| part_w[p] + g.node_w[v] <= cap)
                .max_by_key(|&(&p, &w)| (w, std::cmp::Reverse(p)))
                .map(|(&p, _)| p)
                .unwrap_or_else(|| (0..k).min_by_key(|&p| (part_w[p], p)).unwrap());
            grow(p, v, &mut labels, &mut part_w, &mut assigned, &mut conn, &mut frontier, &mut part_q, &mut queued);
            continue;
        };
        if w_p != part_w[p] {
            continue; // stale weight
        }
        queued[p] = false;
        // Best valid frontier candidate of the lightest part.
        let candidate = loop {
            match frontier[p].pop() {
                None => break None,
                Some((w, Reverse(v))) => {
                    if labels[v] == usize::MAX && conn[v].get(&p) == Some(&w) {
                        break Some((w, v));
                    }
                }
            }
        };
        let Some((w, v)) = candidate else {
            continue; // exhausted frontier: the part stops growing
        };
        if part_w[p] + g.node_w[v] <= cap || part_w[p] == 0 {
            grow(p, v, &mut labels, &mut part_w, &mut assigned, &mut conn, &mut frontier, &mut part_q, &mut queued);
        } else {
            // Cap blocked: park the candidate and sleep until the frontier
            // changes.
            frontier[p].push((w, Reverse(v)));
        }
    }
    labels
}

/// Boundary refinement: moves a node to the adjacent part with the best
/// gain (cut decrease) when the balance cap allows it. Zero-gain moves are
/// taken only when they improve balance.
fn refine(g: &Graph, labels: &mut [usize], k: usize, cap: i64, passes: usize) {
    let n = g.len();
    let mut part_w = vec![0i64; k];
    let mut part_n = vec![0usize; k];
    for v in 0..n {
        part_w[labels[v]] += g.node_w[v];
        part_n[labels[v]] += 1;
    }
    for _ in 0..passes {
        let mut moved = false;
        for v in 0..n {
            let from = labels[v];
            if part_n[from] == 1 {
                continue; // never empty a part
            }
            let mut internal = 0i64;
            let mut ext: HashMap<usize, i64> = HashMap::new();
            for &(u, w) in &g.adj[v] {
                if labels[u] == from {
                    internal += w;
                } else {
                    *ext.entry(labels[u]).or_insert(0) += w;
                }
            }
            let mut best: Option<(i64, usize)> = None;
            for (&p, &w) in &ext {
                if part_w[p] + g.node_w[v] > cap {
                    continue;
                }
                let gain = w - internal;
                let better = match best {
                    None => gain > 0 || (gain == 0 && part_w[p] + g.node_w[v] < part_w[from]),
                    Some((bg, bp)) => gain > bg || (gain == bg && p < bp),
                };
                if better && (gain > 0 || (gain == 0 && part_w[p] + g.node_w[v] < part_w[from])) {
                    best = Some((gain, p));
                }
            }
            if let Some((_, p)) = best {
                part_w[from] -= g.node_w[v];
                part_w[p] += g.node_w[v];
                part_n[from] -= 1;
                part_n[p] += 1;
                labels[v] = p;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Reassigns every non-principal connected fragment of each part to the
/// neighboring part it is most strongly tied to, until all parts are
/// connected. The heaviest fragment keeps the label.
fn enforce_contiguity(g: &Graph, labels: &mut [usize]) {
    let n = g.len();
    for _ in 0..n {
        let mut changed = false;
        // Connected components per part.
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            if comp[v] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![v];
            comp[v] = id;
            let mut stack = vec![v];
            while let Some(x) = stack.pop() {
                for &(u, _) in &g.adj[x] {
                    if labels[u] == labels[x] && comp[u] == usize::MAX {
                        comp[u] = id;
                        members.push(u);
                        stack.push(u);
                    }
                }
            }
            comps.push(members);
        }
        let mut principal: HashMap<usize, usize> = HashMap::new();
        for (id, members) in comps.iter().enumerate() {
            let p = labels[members[0]];
            let w: i64 = members.iter().map(|&v| g.node_w[v]).sum();
            let entry = principal.entry(p).or_insert(id);
            let cur_w: i64 = comps[*entry].iter().map(|&v| g.node_w[v]).sum();
            if w > cur_w || (w == cur_w && id < *entry) {
                *entry = id;
            }
        }
        for (id, members) in comps.iter().enumerate() {
            let p = labels[members[0]];
            if principal[&p] == id {
                continue;
            }
            // Strongest neighboring part.
            let mut ties: HashMap<usize, i64> = HashMap::new();
            for &v in members {
                for &(u, w) in &g.adj[v] {
                    if comp[u] != id {
                        *ties.entry(labels[u]).or_insert(0) += w;
                    }
                }
            }
            if let Some((&q, _)) =
                ties.iter().max_by_key(|&(&q, &w)| (w, std::cmp::Reverse(q)))
            {
                for &v in members {
                    labels[v] = q;
                }
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Rebalancing by diffusion: while some part exceeds the bound, find the
/// nearest part (in the part-adjacency graph) light enough to absorb more
/// weight and shift one boundary node across every arc of the path towards
/// it, keeping every part connected and non-empty.
fn repair_balance(g: &Graph, labels: &mut [usize], bound: i64) {
    let n = g.len();
    let nparts = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut part_w = vec![0i64; nparts];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nparts];
    for v in 0..n {
        part_w[labels[v]] += g.node_w[v];
        members[labels[v]].push(v);
    }
    let wmax = g.max_node_weight();
    let mut prev = vec![usize::MAX; nparts];
    for _ in 0..4 * n {
        let Some(heavy) = (0..nparts)
            .filter(|&p| part_w[p] > bound)
            .max_by_key(|&p| (part_w[p], std::cmp::Reverse(p)))
        else {
            return;
        };
        // BFS on the part graph; the neighbors of a part are collected on
        // the fly from the arcs leaving its members.
        prev.fill(usize::MAX);
        let mut queue = std::collections::VecDeque::new();
        prev[heavy] = heavy;
        queue.push_back(heavy);
        let mut target = None;
        let mut nbrs = Vec::new();
        'bfs: while let Some(p) = queue.pop_front() {
            nbrs.clear();
            for &v in &members[p] {
                for &(u, _) in &g.adj[v] {
                    if labels[u] != p {
                        nbrs.push(labels[u]);
                    }
                }
            }
            nbrs.sort_unstable();
            nbrs.dedup();
            for &q in &nbrs {
                if prev[q] == usize::MAX {
                    prev[q] = p;
                    if part_w[q] < part_w[heavy] && part_w[q] + wmax <= bound {
                        target = Some(q);
                        break 'bfs;
                    }
                    queue.push_back(q);
                }
            }
        }
        let Some(target) = target else {
            return; // nothing can absorb weight; the caller flags this
        };
        let mut path = vec![target];
        while *path.last().unwrap() != heavy {
            path.push(prev[*path.last().unwrap()]);
        }
        path.reverse();
        for step in path.windows(2) {
            if !shift_one(g, labels, &mut part_w, &mut members, step[0], step[1]) {
                return;
            }
        }
    }
}

/// Moves the best boundary node of `src` adjacent to `dst` into `dst`.
/// Prefers nodes whose removal keeps `src` connected; otherwise moves an
/// articulation node and hands the broken-off fragments (all attached to it)
/// to `dst` as well, keeping every part connected. Returns false when `src`
/// has no node adjacent to `dst` to give away.
fn shift_one(
    g: &Graph,
    labels: &mut [usize],
    part_w: &mut [i64],
    members: &mut [Vec<usize>],
    src: usize,
    dst: usize,
) -> bool {
    if members[src].len() <= 1 {
        return false;
    }
    let mut best: Option<(bool, i64, usize)> = None; // (keeps connectivity, gain, node)
    for &v in &members[src] {
        let mut internal = 0i64;
        let mut to_dst = 0i64;
        for &(u, w) in &g.adj[v] {
            if labels[u] == src {
                internal += w;
            } else if labels[u] == dst {
                to_dst += w;
            }
        }
        if to_dst == 0 {
            continue;
        }
        let keeps = connected_without(g, &members[src], v, src, labels);
        let gain = to_dst - internal;
        let better = match best {
            None => true,
            Some((bk, bg, bv)) => {
                (keeps, gain, std::cmp::Reverse(v)) > (bk, bg, std::cmp::Reverse(bv))
            }
        };
        if better {
            best = Some((keeps, gain, v));
        }
    }
    let Some((keeps, _, v)) = best else {
        return false;
    };
    fn move_node(
        g: &Graph,
        labels: &mut [usize],
        part_w: &mut [i64],
        members: &mut [Vec<usize>],
        src: usize,
        dst: usize,
        v: usize,
    ) {
        labels[v] = dst;
        part_w[src] -= g.node_w[v];
        part_w[dst] += g.node_w[v];
        let pos = members[src].iter().position(|&m| m == v).unwrap();
        members[src].swap_remove(pos);
        members[dst].push(v);
    }
    move_node(g, labels, part_w, members, src, dst, v);
    if !keeps {
        // Fragments of src no longer reaching the principal component were
        // attached through v, so they stay contiguous inside dst.
        let rest: Vec<usize> = members[src].clone();
        let mut comp = HashMap::new();
        let mut ncomp = 0;
        for &m in &rest {
            if comp.contains_key(&m) {
                continue;
            }
            let id = ncomp;
            ncomp += 1;
            comp.insert(m, id);
            let mut stack = vec![m];
            while let Some(x) = stack.pop() {
                for &(u, _) in &g.adj[x] {
                    if labels[u] == src && !comp.contains_key(&u) {
                        comp.insert(u, id);
                        stack.push(u);
                    }
                }
            }
        }
        let mut comp_w = vec![0i64; ncomp];
        for &m in &rest {
            comp_w[comp[&m]] += g.node_w[m];
        }
        let principal = (0..ncomp).max_by_key(|&c| (comp_w[c], std::cmp::Reverse(c))).unwrap();
        for &m in &rest {
            if comp[&m] != principal {
                move_node(g, labels, part_w, members, src, dst, m);
            }
        }
    }
    true
}

/// True when the part stays connected after hypothetically removing `v`.
fn connected_without(g: &Graph, members: &[usize], v: usize, part: usize, labels: &[usize]) -> bool {
    let start = match members.iter().find(|&&u| u != v) {
        Some(&u) => u,
        None => return true,
    };
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &(u, _) in &g.adj[x] {
            if u != v && labels[u] == part && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen.len() == members.len() - 1
}

fn cut_weight(g: &Graph, labels: &[usize]) -> i64 {
    let mut cut = 0;
    for v in 0..g.len() {
        for &(u, w) in &g.adj[v] {
            if v < u && labels[v] != labels[u] {
                cut += w;
            }
        }
    }
    cut
}

/// Partitions the dual graph into K parts.
pub fn kway_partition(
    dual: &DualGraph,
    k: usize,
    seed: u64,
    options: &PartitionOptions,
) -> PartitionLabels {
    let g0 = Graph::from_dual(dual);
    let n = g0.len();
    let k = k.max(1);
    let mut rng = SplitMix64::new(seed ^ 0x7061727469746e);
    if k >= n {
        let labels: Vec<usize> = (0..n).collect();
        return finish(&g0, labels, k, options);
    }

    let total = g0.total_weight();
    let avg = total as f64 / k as f64;
    let cap_for = |wmax: i64| -> i64 {
        (((1.0 + options.imbalance_tol) * avg).floor() as i64).max(avg.ceil() as i64 + wmax)
    };

    // Coarsening.
    let target = (4 * k).max(64);
    let mut levels: Vec<(Graph, Vec<usize>)> = Vec::new();
    let mut current = g0;
    while current.len() > target {
        let (coarse, map) = coarsen(&current, &mut rng);
        if coarse.len() as f64 > 0.9 * current.len() as f64 {
            break;
        }
        levels.push((current, map));
        current = coarse;
    }

    // Initial partition on the coarsest graph, then uncoarsen and refine.
    let cap = cap_for(current.max_node_weight());
    let mut labels = initial_partition(&current, k, cap, &mut rng);
    refine(&current, &mut labels, k, cap, options.refine_passes);
    while let Some((fine, map)) = levels.pop() {
        let mut fine_labels = vec![0usize; fine.len()];
        for v in 0..fine.len() {
            fine_labels[v] = labels[map[v]];
        }
        let cap = cap_for(fine.max_node_weight());
        refine(&fine, &mut fine_labels, k, cap, options.refine_passes);
        labels = fine_labels;
        current = fine;
    }
    enforce_contiguity(&current, &mut labels);
    let bound = ((1.0 + options.imbalance_tol) * avg + current.max_node_weight() as f64).floor() as i64;
    repair_balance(&current, &mut labels, bound);
    finish(&current, labels, k, options)
}

fn finish(g: &Graph, mut labels: Vec<usize>, k: usize, options: &PartitionOptions) -> PartitionLabels {
    // Compact labels to 0..k_actual, preserving part-index order.
    let mut seen: Vec<bool> = vec![false; k.max(labels.iter().copied().max().unwrap_or(0) + 1)];
    for &l in &labels {
        seen[l] = true;
    }
    let mut remap = vec![usize::MAX; seen.len()];
    let mut k_actual = 0;
    for (p, &s) in seen.iter().enumerate() {
        if s {
            remap[p] = k_actual;
            k_actual += 1;
        }
    }
    for l in labels.iter_mut() {
        *l = remap[*l];
    }
    let mut part_w = vec![0i64; k_actual];
    for (v, &l) in labels.iter().enumerate() {
        part_w[l] += g.node_w[v];
    }
    let total = g.total_weight();
    let avg = total as f64 / k as f64;
    let max_w = part_w.iter().copied().max().unwrap_or(0);
    let bound = (1.0 + options.imbalance_tol) * avg + g.max_node_weight() as f64;
    PartitionLabels {
        cut: cut_weight(g, &labels),
        imbalance: max_w as f64 / avg,
        infeasible_balance: (max_w as f64) > bound,
        labels,
        k_requested: k,
        k_actual,
    }
}

/// Writes labels as text: a `n K` header line, then one 1-based label per
/// element line.
pub fn write_labels(labels: &PartitionLabels) -> String {
    let mut out = format!("{} {}\n", labels.labels.len(), labels.k_actual);
    for &l in &labels.labels {
        out.push_str(&format!("{}\n", l + 1));
    }
    out
}

/// Reads a label file produced by [`write_labels`] (or by an external
/// partitioner following the same format).
pub fn read_labels(text: &str) -> Result<PartitionLabels> {
    let mut tokens = text.split_whitespace();
    let n: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("empty label file".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad element count: {e}")))?;
    let k: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("missing part count".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad part count: {e}")))?;
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let l: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing label {i}")))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad label {i}: {e}")))?;
        if l < 1 || l > k {
            return Err(Error::Parse(format!("label {l} outside 1..={k}")));
        }
        labels.push(l - 1);
    }
    Ok(PartitionLabels {
        labels,
        k_requested: k,
        k_actual: k,
        cut: 0,
        imbalance: 0.0,
        infeasible_balance: false,
    })
}
