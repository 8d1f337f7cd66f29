//! Graph representations shared by the constructions and the verifier.
//!
//! [`Graph`] is a plain undirected multigraph used for girth, ball and
//! spectral computations. [`DenseBipartiteGraph`] is a materialized bipartite
//! multigraph with ordered neighbor slots on both sides. Oracle-style
//! constructions implement [`ExplicitBipartiteGraph`].

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::par;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (size {size})")]
    VertexOutOfRange { vertex: usize, size: usize },
    #[error("slot {slot} out of range for vertex {vertex} (degree {degree})")]
    SlotOutOfRange {
        vertex: usize,
        slot: usize,
        degree: usize,
    },
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph has a self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0}")]
    Oracle(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Undirected multigraph on `0..n`. Parallel edges appear as repeated
/// entries in the adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.adj.len();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { vertex: w, size: n });
            }
        }
        self.adj[u].push(v);
        if u != v {
            self.adj[v].push(u);
        }
        Ok(())
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            g.add_edge(u, (u + 1) % n).unwrap();
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 1..n {
            g.add_edge(u - 1, u).unwrap();
        }
        g
    }

    pub fn petersen() -> Self {
        let mut g = Graph::empty(10);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5).unwrap();
            g.add_edge(i, i + 5).unwrap();
            g.add_edge(5 + i, 5 + (i + 2) % 5).unwrap();
        }
        g
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        let loops: usize = self
            .adj
            .iter()
            .enumerate()
            .map(|(u, a)| a.iter().filter(|&&v| v == u).count())
            .sum();
        (self.adj.iter().map(Vec::len).sum::<usize>() - loops) / 2 + loops
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Common degree if every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    /// Edges `(u, v)` with `u <= v`, sorted lexicographically, with
    /// multiplicity.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.num_edges());
        for (u, a) in self.adj.iter().enumerate() {
            for &v in a {
                if u <= v {
                    edges.push((u, v));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Two-coloring (`false` = left) if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let n = self.adj.len();
        let mut color: Vec<Option<bool>> = vec![None; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].unwrap();
                for &v in &self.adj[u] {
                    match color[v] {
                        None => {
                            color[v] = Some(!cu);
                            queue.push_back(v);
                        }
                        Some(cv) if cv == cu => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(Option::unwrap).collect())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.adj.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Induced subgraph on `vertices` (relabelled `0..vertices.len()` in the
    /// given order), keeping edge multiplicities.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.adj.len()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut g = Graph::empty(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &self.adj[u] {
                let j = index[v];
                if j != usize::MAX && i <= j {
                    if i == j {
                        g.adj[i].push(i);
                    } else {
                        g.adj[i].push(j);
                        g.adj[j].push(i);
                    }
                }
            }
        }
        g
    }
}

/// Oracle access to a bipartite (multi)graph: the `slot`-th edge at a vertex
/// and the slot the same edge occupies at its other endpoint.
pub trait ExplicitBipartiteGraph: Sync {
    fn n_left(&self) -> usize;
    fn n_right(&self) -> usize;
    fn degree(&self, side: Side, vertex: usize) -> usize;

    /// Returns `(neighbor, co_slot)`: the neighbor reached through `slot`,
    /// and the slot of the same edge at that neighbor.
    fn neighbor(&self, side: Side, vertex: usize, slot: usize) -> Result<(usize, usize), GraphError>;

    /// Slot at `vertex` of the first edge leading to `nbr`.
    fn slot_of(&self, side: Side, vertex: usize, nbr: usize) -> Option<usize> {
        (0..self.degree(side, vertex))
            .find(|&s| matches!(self.neighbor(side, vertex, s), Ok((w, _)) if w == nbr))
    }

    fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Left => self.n_left(),
            Side::Right => self.n_right(),
        }
    }
}

/// Whether two oracle graphs answer every `neighbor` query identically.
pub fn same_adjacency<A, B>(a: &A, b: &B) -> bool
where
    A: ExplicitBipartiteGraph + ?Sized,
    B: ExplicitBipartiteGraph + ?Sized,
{
    if a.n_left() != b.n_left() || a.n_right() != b.n_right() {
        return false;
    }
    [Side::Left, Side::Right].into_iter().all(|side| {
        par::find_first(a.side_len(side), |v| {
            let d = a.degree(side, v);
            d != b.degree(side, v) || (0..d).any(|s| a.neighbor(side, v, s) != b.neighbor(side, v, s))
        })
        .is_none()
    })
}

/// `(left, right, key_at_left, key_at_right)`.
pub type KeyedEdge = (usize, usize, (usize, usize), (usize, usize));

/// Materialized bipartite multigraph with ordered neighbor slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBipartiteGraph {
    n_left: usize,
    n_right: usize,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
    left_coslot: Vec<Vec<usize>>,
    right_coslot: Vec<Vec<usize>>,
}

impl DenseBipartiteGraph {
    /// Builds the graph from per-left-vertex neighbor lists. Right-side slots
    /// are assigned in left-major edge order.
    pub fn from_left_adjacency(
        n_right: usize,
        left_adj: Vec<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let n_left = left_adj.len();
        let mut right_adj = vec![Vec::new(); n_right];
        let mut right_coslot = vec![Vec::new(); n_right];
        let mut left_coslot = Vec::with_capacity(n_left);
        for (u, nbrs) in left_adj.iter().enumerate() {
            let mut cos = Vec::with_capacity(nbrs.len());
            for (s, &v) in nbrs.iter().enumerate() {
                if v >= n_right {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: v,
                        size: n_right,
                    });
                }
                cos.push(right_adj[v].len());
                right_adj[v].push(u);
                right_coslot[v].push(s);
            }
            left_coslot.push(cos);
        }
        Ok(DenseBipartiteGraph {
            n_left,
            n_right,
            left_adj,
            right_adj,
            left_coslot,
            right_coslot,
        })
    }

    /// Edges listed as `(left, right)`; repeated pairs are parallel edges.
    pub fn from_edges(
        n_left: usize,
        n_right: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n_left];
        for &(u, v) in edges {
            if u >= n_left {
                return Err(GraphError::VertexOutOfRange {
                    vertex: u,
                    size: n_left,
                });
            }
            adj[u].push(v);
        }
        DenseBipartiteGraph::from_left_adjacency(n_right, adj)
    }

    /// Builds a graph whose slot order at every vertex follows the given sort
    /// keys.
    pub fn from_keyed_edges(
        n_left: usize,
        n_right: usize,
        edges: &[KeyedEdge],
    ) -> Result<Self, GraphError> {
        let mut at_left: Vec<Vec<((usize, usize), usize)>> = vec![Vec::new(); n_left];
        let mut at_right: Vec<Vec<((usize, usize), usize)>> = vec![Vec::new(); n_right];
        for (e, &(u, v, ku, kv)) in edges.iter().enumerate() {
            if u >= n_left {
                return Err(GraphError::VertexOutOfRange { vertex: u, size: n_left });
            }
            if v >= n_right {
                return Err(GraphError::VertexOutOfRange { vertex: v, size: n_right });
            }
            at_left[u].push((ku, e));
            at_right[v].push((kv, e));
        }
        let mut slot_left = vec![0; edges.len()];
        let mut slot_right = vec![0; edges.len()];
        for lists in [&mut at_left, &mut at_right] {
            for l in lists.iter_mut() {
                l.sort_unstable();
            }
        }
        for l in &at_left {
            for (s, &(_, e)) in l.iter().enumerate() {
                slot_left[e] = s;
            }
        }
        for l in &at_right {
            for (s, &(_, e)) in l.iter().enumerate() {
                slot_right[e] = s;
            }
        }
        let side = |lists: &[Vec<((usize, usize), usize)>], other: &dyn Fn(usize) -> usize, co: &[usize]| {
            let adj: Vec<Vec<usize>> = lists.iter().map(|l| l.iter().map(|&(_, e)| other(e)).collect()).collect();
            let cos: Vec<Vec<usize>> = lists.iter().map(|l| l.iter().map(|&(_, e)| co[e]).collect()).collect();
            (adj, cos)
        };
        let (left_adj, left_coslot) = side(&at_left, &|e| edges[e].1, &slot_right);
        let (right_adj, right_coslot) = side(&at_right, &|e| edges[e].0, &slot_left);
        Ok(DenseBipartiteGraph {
            n_left,
            n_right,
            left_adj,
            right_adj,
            left_coslot,
            right_coslot,
        })
    }

    /// Materializes an oracle graph, keeping its left slot order.
    pub fn from_explicit<G: ExplicitBipartiteGraph + ?Sized>(g: &G) -> Result<Self, GraphError> {
        let rows: Vec<Result<Vec<usize>, GraphError>> = par::map_collect(g.n_left(), |u| {
            (0..g.degree(Side::Left, u))
                .map(|s| g.neighbor(Side::Left, u, s).map(|(v, _)| v))
                .collect()
        });
        let adj = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
        DenseBipartiteGraph::from_left_adjacency(g.n_right(), adj)
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Left => self.n_left,
            Side::Right => self.n_right,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn num_edges(&self) -> usize {
        self.left_adj.iter().map(Vec::len).sum()
    }

    pub fn adjacency(&self, side: Side) -> &[Vec<usize>] {
        match side {
            Side::Left => &self.left_adj,
            Side::Right => &self.right_adj,
        }
    }

    pub fn neighbors(&self, side: Side, v: usize) -> &[usize] {
        &self.adjacency(side)[v]
    }

    /// Edges in left-major slot order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left_adj
            .iter()
            .enumerate()
            .flat_map(|(u, a)| a.iter().map(move |&v| (u, v)))
    }

    pub fn side_degree(&self, side: Side) -> Option<usize> {
        let adj = self.adjacency(side);
        let d = adj.first().map_or(0, Vec::len);
        adj.iter().all(|a| a.len() == d).then_some(d)
    }

    /// `(c, d)` if every left vertex has degree `c` and every right vertex
    /// degree `d`.
    pub fn biregular_degrees(&self) -> Option<(usize, usize)> {
        Some((self.side_degree(Side::Left)?, self.side_degree(Side::Right)?))
    }

    pub fn average_degree(&self, side: Side) -> f64 {
        let n = match side {
            Side::Left => self.n_left,
            Side::Right => self.n_right,
        };
        if n == 0 {
            0.0
        } else {
            self.num_edges() as f64 / n as f64
        }
    }

    pub fn has_parallel_edges(&self) -> bool {
        self.left_adj.iter().any(|a| {
            let mut s = a.clone();
            s.sort_unstable();
            s.windows(2).any(|w| w[0] == w[1])
        })
    }

    /// Swaps the roles of the two sides. Slots on each side are preserved.
    pub fn transpose(&self) -> DenseBipartiteGraph {
        DenseBipartiteGraph {
            n_left: self.n_right,
            n_right: self.n_left,
            left_adj: self.right_adj.clone(),
            right_adj: self.left_adj.clone(),
            left_coslot: self.right_coslot.clone(),
            right_coslot: self.left_coslot.clone(),
        }
    }

    /// Undirected view with left vertices `0..n_left` and right vertices
    /// offset by `n_left`.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::empty(self.num_vertices());
        for (u, a) in self.left_adj.iter().enumerate() {
            for &v in a {
                g.adj[u].push(self.n_left + v);
            }
        }
        for (v, a) in self.right_adj.iter().enumerate() {
            g.adj[self.n_left + v] = a.clone();
        }
        g
    }

    /// Index of a vertex in [`DenseBipartiteGraph::to_graph`].
    pub fn global_index(&self, side: Side, v: usize) -> usize {
        match side {
            Side::Left => v,
            Side::Right => self.n_left + v,
        }
    }

    /// Builds the bipartite view of a two-colorable graph. Vertices colored
    /// `false` go left, in increasing order.
    pub fn from_bipartite_graph(g: &Graph, coloring: &[bool]) -> Result<Self, GraphError> {
        let mut pos = vec![0usize; g.num_vertices()];
        let (mut nl, mut nr) = (0, 0);
        for (v, &c) in coloring.iter().enumerate() {
            if c {
                pos[v] = nr;
                nr += 1;
            } else {
                pos[v] = nl;
                nl += 1;
            }
        }
        let mut adj = vec![Vec::new(); nl];
        for (v, &c) in coloring.iter().enumerate() {
            if c {
                continue;
            }
            for &w in g.neighbors(v) {
                if !coloring[w] {
                    return Err(GraphError::DimensionMismatch(
                        "coloring is not a proper 2-coloring".into(),
                    ));
                }
                adj[pos[v]].push(pos[w]);
            }
        }
        DenseBipartiteGraph::from_left_adjacency(nr, adj)
    }

    /// Plain-text body: `BIPARTITE n_left n_right m` then one `u v` line per
    /// edge in left-major slot order.
    pub fn edge_list_text(&self) -> String {
        let mut s = format!(
            "BIPARTITE {} {} {}\n",
            self.n_left,
            self.n_right,
            self.num_edges()
        );
        for (u, v) in self.edges() {
            s.push_str(&u.to_string());
            s.push(' ');
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    /// SHA-256 of [`DenseBipartiteGraph::edge_list_text`], hex encoded.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.edge_list_text().as_bytes()))
    }
}

impl ExplicitBipartiteGraph for DenseBipartiteGraph {
    fn n_left(&self) -> usize {
        self.n_left
    }

    fn n_right(&self) -> usize {
        self.n_right
    }

    fn degree(&self, side: Side, vertex: usize) -> usize {
        self.adjacency(side)[vertex].len()
    }

    fn neighbor(&self, side: Side, vertex: usize, slot: usize) -> Result<(usize, usize), GraphError> {
        let (adj, cos) = match side {
            Side::Left => (&self.left_adj, &self.left_coslot),
            Side::Right => (&self.right_adj, &self.right_coslot),
        };
        let row = adj.get(vertex).ok_or(GraphError::VertexOutOfRange {
            vertex,
            size: adj.len(),
        })?;
        let v = *row.get(slot).ok_or(GraphError::SlotOutOfRange {
            vertex,
            slot,
            degree: row.len(),
        })?;
        Ok((v, cos[vertex][slot]))
    }

    fn slot_of(&self, side: Side, vertex: usize, nbr: usize) -> Option<usize> {
        self.adjacency(side)[vertex].iter().position(|&w| w == nbr)
    }
}
