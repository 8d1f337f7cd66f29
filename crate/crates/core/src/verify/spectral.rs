use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DenseBipartiteGraph, Graph, Side};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("dense eigendecomposition limited to {limit} vertices, graph has {n} and is not bipartite")]
    TooLarge { n: usize, limit: usize },
    #[error("graph has no vertices")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub vertices: usize,
    pub top: f64,
    /// Largest absolute value among the nontrivial eigenvalues (both `±top`
    /// removed for bipartite graphs, `top` alone otherwise).
    pub lambda2: f64,
    /// Second largest eigenvalue, signed.
    pub second_signed: f64,
    pub method: Method,
    pub residual: f64,
    pub connected: bool,
    pub bipartite: bool,
}

#[derive(Clone, Debug)]
pub struct SpectralOptions {
    pub dense_limit: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub force: Option<Method>,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_limit: 3000,
            tolerance: 1e-8,
            max_iterations: 200_000,
            force: None,
            seed: 0x5eed,
        }
    }
}

fn adjacency_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.num_vertices();
    let mut a = DMatrix::zeros(n, n);
    for v in 0..n {
        for &w in g.neighbors(v) {
            a[(v, w)] += 1.0;
        }
    }
    a
}

/// Full spectrum of the adjacency matrix, descending.
pub fn dense_spectrum(g: &Graph) -> Vec<f64> {
    let eig = SymmetricEigen::new(adjacency_matrix(g));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Gram matrix of the biadjacency operator on the given side.
fn gram(b: &DenseBipartiteGraph, side: Side) -> DMatrix<f64> {
    let n = b.side_len(side);
    let mut m = DMatrix::zeros(n, n);
    for w in 0..b.side_len(side.opposite()) {
        let nb = b.neighbors(side.opposite(), w);
        for &x in nb {
            for &y in nb {
                m[(x, y)] += 1.0;
            }
        }
    }
    m
}

fn smaller_side(b: &DenseBipartiteGraph) -> Side {
    if b.n_left() <= b.n_right() {
        Side::Left
    } else {
        Side::Right
    }
}

/// Singular values of the biadjacency matrix, descending, computed from the
/// Gram matrix on the smaller side.
pub fn singular_values(b: &DenseBipartiteGraph) -> Vec<f64> {
    let eig = SymmetricEigen::new(gram(b, smaller_side(b)));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Full signed spectrum of a bipartite graph: `±sigma_i` plus zeros.
pub fn bipartite_spectrum(b: &DenseBipartiteGraph) -> Vec<f64> {
    let sv = singular_values(b);
    let zeros = b.num_vertices() - 2 * sv.len();
    let mut vals: Vec<f64> = sv.iter().flat_map(|&s| [s, -s]).collect();
    vals.extend(std::iter::repeat_n(0.0, zeros));
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

struct GramOperator<'a> {
    b: &'a DenseBipartiteGraph,
    side: Side,
}

impl GramOperator<'_> {
    fn dim(&self) -> usize {
        self.b.side_len(self.side)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let other = self.side.opposite();
        let mid: Vec<f64> = par::map_collect(self.b.side_len(other), |w| {
            self.b.neighbors(other, w).iter().map(|&v| x[v]).sum()
        });
        par::map_collect(self.dim(), |v| {
            self.b.neighbors(self.side, v).iter().map(|&w| mid[w]).sum()
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(x, u);
        x.iter_mut().zip(u).for_each(|(v, w)| *v -= c * w);
    }
}

/// Power iteration for the top eigenpair of `op` orthogonal to `deflate`.
/// Returns `(eigenvalue, vector, residual)`.
fn power_iterate(
    op: &GramOperator,
    deflate: &[Vec<f64>],
    opts: &SpectralOptions,
    salt: u64,
) -> Result<(f64, Vec<f64>, f64), SpectralError> {
    use rand::Rng;
    let mut rng = crate::seeds::rng(opts.seed, &[salt]);
    let mut x: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut x, deflate);
    normalize(&mut x);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let mut y = op.apply(&x);
        orthogonalize(&mut y, deflate);
        let theta = dot(&x, &y);
        residual = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tolerance {
            return Ok((theta, x, residual));
        }
        if normalize(&mut y) == 0.0 {
            return Ok((0.0, x, 0.0));
        }
        x = y;
    }
    Err(SpectralError::NonConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

pub fn lambda2_bipartite(b: &DenseBipartiteGraph) -> Result<SpectralReport, SpectralError> {
    lambda2_bipartite_with(b, &SpectralOptions::default())
}

/// Nontrivial second eigenvalue of a bipartite graph: the second singular
/// value of its biadjacency matrix.
pub fn lambda2_bipartite_with(
    b: &DenseBipartiteGraph,
    opts: &SpectralOptions,
) -> Result<SpectralReport, SpectralError> {
    let n = b.num_vertices();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    let connected = b.to_graph().is_connected();
    let method = opts.force.unwrap_or(if n <= opts.dense_limit {
        Method::Dense
    } else {
        Method::Iterative
    });
    let (top, second, residual) = match method {
        Method::Dense => {
            let sv = singular_values(b);
            (sv[0], sv.get(1).copied().unwrap_or(0.0), 0.0)
        }
        Method::Iterative => {
            let op = GramOperator {
                b,
                side: smaller_side(b),
            };
            let (t, v1, _) = power_iterate(&op, &[], opts, 1)?;
            let (s, _, r) = if op.dim() > 1 {
                power_iterate(&op, &[v1], opts, 2)?
            } else {
                (0.0, Vec::new(), 0.0)
            };
            (t.max(0.0).sqrt(), s.max(0.0).sqrt(), r)
        }
    };
    Ok(SpectralReport {
        vertices: n,
        top,
        lambda2: second,
        second_signed: second,
        method,
        residual,
        connected,
        bipartite: true,
    })
}

pub fn lambda2(g: &Graph) -> Result<SpectralReport, SpectralError> {
    lambda2_with(g, &SpectralOptions::default())
}

/// Spectral summary of any graph. Bipartite graphs go through
/// [`lambda2_bipartite_with`]; others need the dense solver.
pub fn lambda2_with(g: &Graph, opts: &SpectralOptions) -> Result<SpectralReport, SpectralError> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    if let Some(coloring) = g.bipartition() {
        let b = DenseBipartiteGraph::from_bipartite_graph(g, &coloring)
            .expect("bipartition is a proper coloring");
        return lambda2_bipartite_with(&b, opts);
    }
    if n > opts.dense_limit {
        return Err(SpectralError::TooLarge {
            n,
            limit: opts.dense_limit,
        });
    }
    let vals = dense_spectrum(g);
    Ok(SpectralReport {
        vertices: n,
        top: vals[0],
        lambda2: vals[1..].iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        second_signed: vals.get(1).copied().unwrap_or(0.0),
        method: Method::Dense,
        residual: 0.0,
        connected: g.is_connected(),
        bipartite: false,
    })
}
