//! Edge-vertex incidence graphs and tripartite products.

use crate::graph::{DenseBipartiteGraph, ExplicitBipartiteGraph, Graph, GraphError, Side};
use crate::par;

/// The `(2, d)`-biregular incidence graph of a `d`-regular graph: left
/// vertices are the edges of `g` in lexicographic `(min, max)` order, right
/// vertices are the vertices of `g`.
pub fn edge_vertex_incidence(g: &Graph) -> Result<DenseBipartiteGraph, GraphError> {
    g.regular_degree().ok_or(GraphError::NotRegular)?;
    if let Some(v) = (0..g.num_vertices()).find(|&v| g.neighbors(v).contains(&v)) {
        return Err(GraphError::SelfLoop(v));
    }
    let adj = g.canonical_edges().into_iter().map(|(u, v)| vec![u, v]).collect();
    DenseBipartiteGraph::from_left_adjacency(g.num_vertices(), adj)
}

fn check_factors<G1, G2>(g1: &G1, g2: &G2, g0: &DenseBipartiteGraph) -> Result<(), GraphError>
where
    G1: ExplicitBipartiteGraph + ?Sized,
    G2: ExplicitBipartiteGraph + ?Sized,
{
    let m = g1.n_right();
    if g2.n_left() != m {
        return Err(GraphError::DimensionMismatch(format!(
            "middle sets differ: G1 has {m} right vertices, G2 has {} left vertices",
            g2.n_left()
        )));
    }
    if let Some(w) = (0..m).find(|&w| g1.degree(Side::Right, w) != g0.n_left()) {
        return Err(GraphError::DimensionMismatch(format!(
            "middle vertex {w} has G1-degree {}, gadget has {} left vertices",
            g1.degree(Side::Right, w),
            g0.n_left()
        )));
    }
    if let Some(w) = (0..m).find(|&w| g2.degree(Side::Left, w) != g0.n_right()) {
        return Err(GraphError::DimensionMismatch(format!(
            "middle vertex {w} has G2-degree {}, gadget has {} right vertices",
            g2.degree(Side::Left, w),
            g0.n_right()
        )));
    }
    Ok(())
}

/// Materialized tripartite product. One edge `(n_G1(w, i), n_G2(w, j))` per
/// middle vertex `w` and gadget edge `(i, j)`, parallel edges kept. Slots at a
/// left vertex are ordered by (G1 slot, gadget slot), and symmetrically on
/// the right, matching [`TripartiteOracle`].
pub fn tripartite_product<G1, G2>(
    g1: &G1,
    g2: &G2,
    g0: &DenseBipartiteGraph,
) -> Result<DenseBipartiteGraph, GraphError>
where
    G1: ExplicitBipartiteGraph + ?Sized,
    G2: ExplicitBipartiteGraph + ?Sized,
{
    check_factors(g1, g2, g0)?;
    // Gadget edges with their slots at both endpoints.
    let gadget: Vec<(usize, usize, usize, usize)> = (0..g0.n_left())
        .flat_map(|i| {
            (0..g0.degree(Side::Left, i)).map(move |s| {
                let (j, t) = g0.neighbor(Side::Left, i, s).expect("slot in range");
                (i, j, s, t)
            })
        })
        .collect();
    let per_middle: Vec<Result<Vec<_>, GraphError>> = par::map_collect(g1.n_right(), |w| {
        let left: Vec<(usize, usize)> = (0..g0.n_left())
            .map(|i| g1.neighbor(Side::Right, w, i))
            .collect::<Result<_, _>>()?;
        let right: Vec<(usize, usize)> = (0..g0.n_right())
            .map(|j| g2.neighbor(Side::Left, w, j))
            .collect::<Result<_, _>>()?;
        Ok(gadget
            .iter()
            .map(|&(i, j, s, t)| {
                let (x, xs) = left[i];
                let (y, ys) = right[j];
                (x, y, (xs, s), (ys, t))
            })
            .collect())
    });
    let mut edges = Vec::with_capacity(g1.n_right() * gadget.len());
    for chunk in per_middle {
        edges.extend(chunk?);
    }
    DenseBipartiteGraph::from_keyed_edges(g1.n_left(), g2.n_right(), &edges)
}

/// Neighbor oracle for the tripartite product. Needs a biregular gadget so
/// that edge numbers split into (factor slot, gadget slot) pairs.
pub struct TripartiteOracle<'a, G1: ?Sized, G2: ?Sized> {
    g1: &'a G1,
    g2: &'a G2,
    g0: &'a DenseBipartiteGraph,
    d0_left: usize,
    d0_right: usize,
}

impl<'a, G1, G2> TripartiteOracle<'a, G1, G2>
where
    G1: ExplicitBipartiteGraph + ?Sized,
    G2: ExplicitBipartiteGraph + ?Sized,
{
    pub fn new(g1: &'a G1, g2: &'a G2, g0: &'a DenseBipartiteGraph) -> Result<Self, GraphError> {
        check_factors(g1, g2, g0)?;
        let (d0_left, d0_right) = g0.biregular_degrees().ok_or_else(|| {
            GraphError::DimensionMismatch("gadget must be biregular for the oracle".into())
        })?;
        Ok(TripartiteOracle {
            g1,
            g2,
            g0,
            d0_left,
            d0_right,
        })
    }
}

impl<G1, G2> ExplicitBipartiteGraph for TripartiteOracle<'_, G1, G2>
where
    G1: ExplicitBipartiteGraph + ?Sized,
    G2: ExplicitBipartiteGraph + ?Sized,
{
    fn n_left(&self) -> usize {
        self.g1.n_left()
    }

    fn n_right(&self) -> usize {
        self.g2.n_right()
    }

    fn degree(&self, side: Side, vertex: usize) -> usize {
        match side {
            Side::Left => self.g1.degree(Side::Left, vertex) * self.d0_left,
            Side::Right => self.g2.degree(Side::Right, vertex) * self.d0_right,
        }
    }

    fn neighbor(&self, side: Side, vertex: usize, slot: usize) -> Result<(usize, usize), GraphError> {
        let degree = self.degree(side, vertex);
        if slot >= degree {
            return Err(GraphError::SlotOutOfRange {
                vertex,
                slot,
                degree,
            });
        }
        match side {
            Side::Left => {
                let (s, g) = (slot / self.d0_left, slot % self.d0_left);
                let (w, i) = self.g1.neighbor(Side::Left, vertex, s)?;
                let (j, gco) = self.g0.neighbor(Side::Left, i, g)?;
                let (y, yslot) = self.g2.neighbor(Side::Left, w, j)?;
                Ok((y, yslot * self.d0_right + gco))
            }
            Side::Right => {
                let (s, g) = (slot / self.d0_right, slot % self.d0_right);
                let (w, j) = self.g2.neighbor(Side::Right, vertex, s)?;
                let (i, gco) = self.g0.neighbor(Side::Right, j, g)?;
                let (x, xslot) = self.g1.neighbor(Side::Right, w, i)?;
                Ok((x, xslot * self.d0_left + gco))
            }
        }
    }
}
