use thiserror::Error;

use crate::graph::{DenseBipartiteGraph, Graph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("path enumeration exceeded {limit} search steps")]
    TooMany { limit: u64 },
    #[error("path length must be a positive even number, got {0}")]
    BadLength(usize),
}

/// Search steps allowed before the counter gives up.
pub const PATH_LIMIT: u64 = 100_000_000;

/// Number of simple paths with exactly `len` edges whose endpoints both lie
/// on the left, each undirected path counted once. Parallel edges give
/// distinct paths.
pub fn count_lr_simple_paths(g: &DenseBipartiteGraph, len: usize) -> Result<u64, PathError> {
    count_lr_simple_paths_within(g, len, PATH_LIMIT)
}

pub fn count_lr_simple_paths_within(g: &DenseBipartiteGraph, len: usize, limit: u64) -> Result<u64, PathError> {
    if len == 0 || len % 2 == 1 {
        return Err(PathError::BadLength(len));
    }
    let adj = g.to_graph();
    let mut search = Search {
        g: &adj,
        on_path: vec![false; adj.num_vertices()],
        steps: 0,
        limit,
    };
    let mut total = 0;
    for s in 0..g.n_left() {
        search.on_path[s] = true;
        total += search.extend(s, s, len).ok_or(PathError::TooMany { limit })?;
        search.on_path[s] = false;
    }
    Ok(total)
}

struct Search<'a> {
    g: &'a Graph,
    on_path: Vec<bool>,
    steps: u64,
    limit: u64,
}

impl Search<'_> {
    fn extend(&mut self, start: usize, v: usize, left: usize) -> Option<u64> {
        self.steps += 1;
        if self.steps > self.limit {
            return None;
        }
        if left == 0 {
            // Left vertices come first in the global numbering.
            return Some(u64::from(v > start));
        }
        let mut count = 0;
        for &w in self.g.neighbors(v) {
            if !self.on_path[w] {
                self.on_path[w] = true;
                let c = self.extend(start, w, left - 1);
                self.on_path[w] = false;
                count += c?;
            }
        }
        Some(count)
    }
}

/// The lower bound `k (m - n + 1)` for graphs of girth at least `g + 1`.
pub fn girth_path_bound(g: &DenseBipartiteGraph, k: usize) -> i64 {
    k as i64 * (g.num_edges() as i64 - g.num_vertices() as i64 + 1)
}

/// The lower bound `k (m - n)` for `g`-bicycle-free graphs.
pub fn bicycle_path_bound(g: &DenseBipartiteGraph, k: usize) -> i64 {
    k as i64 * (g.num_edges() as i64 - g.num_vertices() as i64)
}
