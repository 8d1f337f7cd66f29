use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::par;

/// Shortest cycle through `root`, or a cycle no longer than it, found by a
/// BFS that stops once no shorter cycle can appear. `cap` prunes the search.
fn shortest_cycle_from(g: &Graph, root: usize, cap: usize) -> Option<usize> {
    let n = g.num_vertices();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    let mut best = cap;
    while let Some(v) = queue.pop_front() {
        if 2 * dist[v] + 1 >= best {
            break;
        }
        let mut parent_edge_seen = false;
        for &w in g.neighbors(v) {
            if w == parent[v] && !parent_edge_seen {
                parent_edge_seen = true;
                continue;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            } else {
                best = best.min(dist[v] + dist[w] + 1);
            }
        }
    }
    (best < cap).then_some(best)
}

/// Length of the shortest cycle, `None` for forests. A loop counts as a
/// 1-cycle and a doubled edge as a 2-cycle.
pub fn girth(g: &Graph) -> Option<usize> {
    if (0..g.num_vertices()).any(|v| g.neighbors(v).contains(&v)) {
        return Some(1);
    }
    par::map_reduce(
        g.num_vertices(),
        |v| shortest_cycle_from(g, v, usize::MAX),
        || None,
        |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BicycleReport {
    pub radius: usize,
    pub bicycle_free: bool,
    /// Center of the first ball with more edges than vertices.
    pub witness: Option<usize>,
    pub witness_vertices: Option<usize>,
    pub witness_edges: Option<usize>,
}

/// Vertex and edge counts (with multiplicity) of the radius-`r` ball at `v`.
pub fn ball_size(g: &Graph, v: usize, r: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; g.num_vertices()];
    let mut order = vec![v];
    dist[v] = 0;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        if dist[u] == r {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                order.push(w);
            }
        }
    }
    let twice: usize = order
        .iter()
        .map(|&u| {
            g.neighbors(u)
                .iter()
                .filter(|&&w| dist[w] != usize::MAX)
                .count()
        })
        .sum();
    (order.len(), twice / 2)
}

/// Every radius-`r` ball induces at most one cycle. Balls are connected, so
/// this is `edges <= vertices` per ball.
pub fn is_bicycle_free(g: &Graph, r: usize) -> BicycleReport {
    let witness = par::find_first(g.num_vertices(), |v| {
        let (nv, ne) = ball_size(g, v, r);
        ne > nv
    });
    let sizes = witness.map(|v| ball_size(g, v, r));
    BicycleReport {
        radius: r,
        bicycle_free: witness.is_none(),
        witness,
        witness_vertices: sizes.map(|s| s.0),
        witness_edges: sizes.map(|s| s.1),
    }
}

/// Largest `r <= cap` such that `g` is `r`-bicycle-free, or `None` if it is
/// not even 0-bicycle-free (impossible for graphs without loops).
pub fn bicycle_free_radius(g: &Graph, cap: usize) -> Option<usize> {
    let mut best = None;
    for r in 0..=cap {
        if !is_bicycle_free(g, r).bicycle_free {
            break;
        }
        best = Some(r);
    }
    best
}
