//! Brute-force oracles and random graph generators shared by the
//! integration tests. Kept deliberately naive.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{HashMap, VecDeque};

use forge_core::{DenseBipartiteGraph, Graph, Side};
use rand::seq::SliceRandom;
use rand::Rng;

/// Distance from `s` to `t` in `g` with one copy of the edge `skip` removed.
fn dist_without(g: &Graph, s: usize, t: usize, skip: (usize, usize)) -> Option<usize> {
    let mut dist = vec![usize::MAX; g.num_vertices()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        let mut skipped = false;
        for &w in g.neighbors(v) {
            let e = (v.min(w), v.max(w));
            if !skipped && e == skip {
                skipped = true;
                continue;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if w == t {
                    return Some(dist[w]);
                }
                queue.push_back(w);
            }
        }
    }
    None
}

/// Girth by deleting each edge in turn and measuring the detour between its
/// endpoints.
pub fn girth_by_edge_removal(g: &Graph) -> Option<usize> {
    let mut best: Option<usize> = None;
    for u in 0..g.num_vertices() {
        for &v in g.neighbors(u) {
            if v < u {
                continue;
            }
            let cycle = if u == v { Some(1) } else { dist_without(g, u, v, (u, v)).map(|d| d + 1) };
            if let Some(c) = cycle {
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
    }
    best
}

/// `(|N(S)|, |UN(S)|)` by counting edge endpoints in a hash map.
pub fn brute_neighbor_counts(g: &DenseBipartiteGraph, side: Side, s: &[usize]) -> (usize, usize) {
    let mut hits: HashMap<usize, usize> = HashMap::new();
    for &u in s {
        for &v in g.neighbors(side, u) {
            *hits.entry(v).or_default() += 1;
        }
    }
    (hits.len(), hits.values().filter(|&&c| c == 1).count())
}

pub fn bipartite_of(g: &Graph) -> DenseBipartiteGraph {
    DenseBipartiteGraph::from_bipartite_graph(g, &g.bipartition().expect("bipartite")).unwrap()
}

fn distance(g: &DenseBipartiteGraph, u: usize, v: usize) -> Option<usize> {
    let adj = g.to_graph();
    let (s, t) = (g.global_index(Side::Left, u), g.global_index(Side::Right, v));
    let mut dist = vec![usize::MAX; adj.num_vertices()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        if x == t {
            return Some(dist[x]);
        }
        for &y in adj.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    None
}

/// Random simple bipartite graph built by adding random edges that keep
/// every cycle at least `min_girth` long.
pub fn random_high_girth<R: Rng>(rng: &mut R, nl: usize, nr: usize, min_girth: usize, tries: usize) -> DenseBipartiteGraph {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for _ in 0..tries {
        let (u, v) = (rng.gen_range(0..nl), rng.gen_range(0..nr));
        if edges.contains(&(u, v)) {
            continue;
        }
        let g = DenseBipartiteGraph::from_edges(nl, nr, &edges).unwrap();
        if distance(&g, u, v).is_none_or(|d| d + 1 >= min_girth) {
            edges.push((u, v));
        }
    }
    DenseBipartiteGraph::from_edges(nl, nr, &edges).unwrap()
}

/// Random spanning tree on both sides plus `extra` random edges, capped by
/// the number of free pairs.
pub fn random_tree_plus<R: Rng>(rng: &mut R, nl: usize, nr: usize, extra: usize) -> DenseBipartiteGraph {
    let extra = extra.min(nl * nr - (nl + nr - 1));
    let mut order: Vec<(Side, usize)> = (1..nl)
        .map(|u| (Side::Left, u))
        .chain((1..nr).map(|v| (Side::Right, v)))
        .collect();
    order.shuffle(rng);
    let mut placed_left = vec![0];
    let mut placed_right = vec![0];
    let mut edges = vec![(0, 0)];
    for (side, x) in order {
        match side {
            Side::Left => {
                edges.push((x, *placed_right.choose(rng).unwrap()));
                placed_left.push(x);
            }
            Side::Right => {
                edges.push((*placed_left.choose(rng).unwrap(), x));
                placed_right.push(x);
            }
        }
    }
    let mut added = 0;
    while added < extra {
        let e = (rng.gen_range(0..nl), rng.gen_range(0..nr));
        if !edges.contains(&e) {
            edges.push(e);
            added += 1;
        }
    }
    DenseBipartiteGraph::from_edges(nl, nr, &edges).unwrap()
}

/// Eigenvalues of a small symmetric adjacency matrix by Jacobi rotations,
/// sorted descending. Independent of the nalgebra path the library uses.
pub fn jacobi_eigenvalues(g: &Graph) -> Vec<f64> {
    let n = g.num_vertices();
    let mut a = vec![vec![0.0f64; n]; n];
    for v in 0..n {
        for &w in g.neighbors(v) {
            a[v][w] += 1.0;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}
