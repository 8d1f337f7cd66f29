use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DenseBipartiteGraph, Graph, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Clone, Debug)]
pub struct DensityOptions {
    /// Reject sets larger than `d^(-1/eps) |V|`.
    pub enforce_size_gate: bool,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            enforce_size_gate: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub left_size: usize,
    pub right_size: usize,
    pub edges: usize,
    pub d_left: Option<f64>,
    pub d_right: Option<f64>,
    pub lhs: Option<f64>,
    pub lambda: f64,
    pub rhs: f64,
    pub size_gate: f64,
    pub within_gate: bool,
    pub degenerate: bool,
    pub pass: bool,
}

/// `lambda = max(lambda2, sqrt(c-1) + sqrt(d-1)) (1 + 5 eps)` and the right
/// side `lambda^2 - (sqrt(c-1) - sqrt(d-1))^2`.
pub fn density_rhs(lambda2: f64, c: usize, d: usize, eps: f64) -> (f64, f64) {
    let (a, b) = (((c - 1) as f64).sqrt(), ((d - 1) as f64).sqrt());
    let lambda = lambda2.max(a + b) * (1.0 + 5.0 * eps);
    (lambda, lambda * lambda - (a - b).powi(2))
}

/// Checks `(d_L - 1)(d_R - 1) <= lambda^2 - (sqrt(c-1) - sqrt(d-1))^2` for
/// the induced subgraph on `s_left ∪ s_right` of a `(c, d)`-biregular graph
/// with nontrivial second eigenvalue `lambda2`.
pub fn subgraph_density_check(
    g: &DenseBipartiteGraph,
    lambda2: f64,
    s_left: &[usize],
    s_right: &[usize],
    eps: f64,
    opts: &DensityOptions,
) -> Result<DensityReport, DensityError> {
    let (c, d) = g
        .biregular_degrees()
        .ok_or_else(|| DensityError::Precondition("graph is not biregular".into()))?;
    if !(2 <= c && c <= d) {
        return Err(DensityError::Precondition(format!("2 <= c <= d fails for (c, d) = ({c}, {d})")));
    }
    if c * d <= 6 {
        return Err(DensityError::Precondition(format!("cd > 6 fails for (c, d) = ({c}, {d})")));
    }
    if !(eps > 0.0 && eps < 0.01) {
        return Err(DensityError::Precondition(format!("0 < eps < 0.01 fails for eps = {eps}")));
    }
    let size_gate = (d as f64).powf(-1.0 / eps) * g.num_vertices() as f64;
    let size = s_left.len() + s_right.len();
    let within_gate = size as f64 <= size_gate;
    if opts.enforce_size_gate && !within_gate {
        return Err(DensityError::Precondition(format!(
            "|S| <= d^(-1/eps) |V| fails: |S| = {size}, gate = {size_gate:e}"
        )));
    }
    let mut in_right = vec![false; g.n_right()];
    s_right.iter().for_each(|&v| in_right[v] = true);
    let edges: usize = s_left
        .iter()
        .map(|&u| g.neighbors(Side::Left, u).iter().filter(|&&v| in_right[v]).count())
        .sum();
    let (lambda, rhs) = density_rhs(lambda2, c, d, eps);
    let degenerate = edges == 0 || s_left.is_empty() || s_right.is_empty();
    let (d_left, d_right, lhs) = if degenerate {
        (None, None, None)
    } else {
        let dl = edges as f64 / s_left.len() as f64;
        let dr = edges as f64 / s_right.len() as f64;
        (Some(dl), Some(dr), Some((dl - 1.0) * (dr - 1.0)))
    };
    Ok(DensityReport {
        left_size: s_left.len(),
        right_size: s_right.len(),
        edges,
        d_left,
        d_right,
        lhs,
        lambda,
        rhs,
        size_gate,
        within_gate,
        degenerate,
        pass: lhs.is_none_or(|l| l <= rhs + 1e-9),
    })
}

/// `H(t) = (D - I) t^2 - A t + I` for the induced subgraph `G[S]`, in the
/// order of `s`.
pub fn bethe_hessian(g: &Graph, s: &[usize], t: f64) -> DMatrix<f64> {
    let h = g.induced(s);
    let n = h.num_vertices();
    let mut m = DMatrix::zeros(n, n);
    for v in 0..n {
        m[(v, v)] = (h.degree(v) as f64 - 1.0) * t * t + 1.0;
        for &w in h.neighbors(v) {
            m[(v, w)] -= t;
        }
    }
    m
}

/// Positive definiteness by an `LDL^T` factorization whose pivots must all
/// exceed `1e-12`.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::identity(n, n);
    let mut diag = vec![0.0; n];
    for j in 0..n {
        let mut dj = m[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * diag[k];
        }
        if dj <= 1e-12 {
            return false;
        }
        diag[j] = dj;
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * diag[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    true
}

pub fn bethe_hessian_pd(g: &Graph, s: &[usize], t: f64) -> bool {
    is_positive_definite(&bethe_hessian(g, s, t))
}

/// Left and right average degrees `m / |L_S|`, `m / |R_S|` of `G[S]` for a
/// two-colored `g` (`coloring[v] = false` on the left).
pub fn induced_average_degrees(g: &Graph, coloring: &[bool], s: &[usize]) -> Option<(f64, f64)> {
    let h = g.induced(s);
    let m = h.num_edges();
    let nl = s.iter().filter(|&&v| !coloring[v]).count();
    let nr = s.len() - nl;
    (nl > 0 && nr > 0).then(|| (m as f64 / nl as f64, m as f64 / nr as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero() {
        let g = Graph::complete(5);
        let h = bethe_hessian(&g, &[0, 1, 2, 3, 4], 0.0);
        assert_eq!(h, DMatrix::identity(5, 5));
        assert!(bethe_hessian_pd(&g, &[0, 1, 2], 0.0));
    }

    #[test]
    fn single_edge() {
        let g = Graph::path(2);
        let h = bethe_hessian(&g, &[0, 1], 0.5);
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]));
        assert!(bethe_hessian_pd(&g, &[0, 1], 0.5));
    }

    #[test]
    fn indefinite_detected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!is_positive_definite(&m));
        // K4 at t = 0.9: (2)(0.81) + 1 - 0.9*3 < 0 on the constant vector
        assert!(!bethe_hessian_pd(&Graph::complete(4), &[0, 1, 2, 3], 0.9));
    }

    #[test]
    fn density_preconditions() {
        let g = DenseBipartiteGraph::from_left_adjacency(2, vec![vec![0, 1]; 2]).unwrap();
        let err = subgraph_density_check(&g, 0.0, &[0], &[], 0.005, &DensityOptions::default());
        assert!(matches!(err, Err(DensityError::Precondition(m)) if m.contains("cd > 6")));
        let k44 = DenseBipartiteGraph::from_left_adjacency(4, vec![(0..4).collect(); 4]).unwrap();
        let err = subgraph_density_check(&k44, 0.0, &[0], &[], 0.5, &DensityOptions::default());
        assert!(matches!(err, Err(DensityError::Precondition(m)) if m.contains("eps")));
        let gate = subgraph_density_check(&k44, 0.0, &[0], &[], 0.005, &DensityOptions::default());
        assert!(matches!(gate, Err(DensityError::Precondition(m)) if m.contains("d^(-1/eps)")));
        let open = DensityOptions {
            enforce_size_gate: false,
        };
        let r = subgraph_density_check(&k44, 0.0, &[0], &[], 0.005, &open).unwrap();
        assert!(r.degenerate && r.pass && !r.within_gate);
    }
}
