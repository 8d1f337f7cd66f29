use std::cmp::Ordering;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::subsets;
use crate::graph::{DenseBipartiteGraph, Graph, Side};
use crate::{par, seeds};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error("invalid audit parameters: {0}")]
    InvalidParams(String),
}

/// Neighborhood statistics of one vertex set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborCounts {
    pub neighbors: usize,
    pub unique: usize,
    pub incidences: usize,
}

/// Reusable per-worker buffers for [`count_neighbors`].
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    count: Vec<u32>,
    touched: Vec<usize>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            count: vec![0; n],
            touched: Vec::new(),
        }
    }
}

/// Counts `N(S)` and `UN(S)` for `S` on `side`, edges with multiplicity.
pub fn count_neighbors(
    g: &DenseBipartiteGraph,
    side: Side,
    s: &[usize],
    scratch: &mut Scratch,
) -> NeighborCounts {
    let other = g.side_len(side.opposite());
    if scratch.count.len() < other {
        scratch.count.resize(other, 0);
    }
    let mut incidences = 0;
    for &u in s {
        for &v in g.neighbors(side, u) {
            if scratch.count[v] == 0 {
                scratch.touched.push(v);
            }
            scratch.count[v] += 1;
            incidences += 1;
        }
    }
    let neighbors = scratch.touched.len();
    let mut unique = 0;
    for &v in &scratch.touched {
        if scratch.count[v] == 1 {
            unique += 1;
        }
        scratch.count[v] = 0;
    }
    scratch.touched.clear();
    NeighborCounts {
        neighbors,
        unique,
        incidences,
    }
}

/// `UN(S)` for `S` on one side of a bipartite graph, sorted.
pub fn unique_neighbors(g: &DenseBipartiteGraph, side: Side, s: &[usize]) -> Vec<usize> {
    let mut count = vec![0u32; g.side_len(side.opposite())];
    for &u in s {
        for &v in g.neighbors(side, u) {
            count[v] += 1;
        }
    }
    (0..count.len()).filter(|&v| count[v] == 1).collect()
}

/// `UN(S)` in a general graph: vertices outside `S` with exactly one edge
/// into `S`.
pub fn unique_neighbors_in_graph(g: &Graph, s: &[usize]) -> Vec<usize> {
    let mut in_s = vec![false; g.num_vertices()];
    s.iter().for_each(|&v| in_s[v] = true);
    let mut count = vec![0u32; g.num_vertices()];
    for &u in s {
        for &v in g.neighbors(u) {
            count[v] += 1;
        }
    }
    (0..count.len())
        .filter(|&v| !in_s[v] && count[v] == 1)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Threshold {
    /// `|N(S)| >= (1 - epsilon) d |S|`
    NeighborRatio { epsilon: f64 },
    /// `|UN(S)| >= delta d |S|`
    UniqueNeighborRatio { delta: f64 },
    /// `|UN(S)| >= min`
    UniqueNeighborCount { min: usize },
}

impl Threshold {
    pub fn required(&self, d: f64, t: usize) -> f64 {
        match *self {
            Threshold::NeighborRatio { epsilon } => (1.0 - epsilon) * d * t as f64,
            Threshold::UniqueNeighborRatio { delta } => delta * d * t as f64,
            Threshold::UniqueNeighborCount { min } => min as f64,
        }
    }

    pub fn value(&self, c: &NeighborCounts) -> usize {
        match self {
            Threshold::NeighborRatio { .. } => c.neighbors,
            _ => c.unique,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct AuditOptions {
    /// Largest number of subsets enumerated for one size.
    pub budget: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            budget: 2_000_000,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeResult {
    pub size: usize,
    pub mode: Mode,
    pub checked: u64,
    pub worst_value: usize,
    pub worst_ratio: f64,
    pub required: f64,
    pub worst_set: Vec<usize>,
    pub pass: bool,
    /// Set present only on failure, re-validated before reporting.
    pub witness: Option<Vec<usize>>,
}

/// Size bound derived from girth or bicycle-freeness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeBound {
    pub kind: String,
    pub epsilon: f64,
    pub d: f64,
    pub d_prime: f64,
    pub g: usize,
    pub delta: f64,
    /// `delta * g * d'^e` with `e = floor(g/4)` (girth) or `floor(g/2)`.
    pub real_bound: f64,
    pub bound: usize,
    /// `2 (eps d / d' - 1) k d'^k`, the size any counterexample must exceed.
    pub proof_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub kind: String,
    pub graph_checksum: String,
    pub side: Side,
    pub degree: f64,
    pub threshold: Threshold,
    pub size_bound: usize,
    pub bound: Option<SizeBound>,
    pub sizes: Vec<SizeResult>,
    pub vacuous: bool,
    pub pass: bool,
    pub wall_time_ms: f64,
}

impl AuditReport {
    pub fn failures(&self) -> impl Iterator<Item = &SizeResult> {
        self.sizes.iter().filter(|s| !s.pass)
    }
}

fn bound_inner(kind: &str, epsilon: f64, d: f64, d_prime: f64, g: usize) -> Result<SizeBound, AuditError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(AuditError::InvalidParams(format!("epsilon = {epsilon} outside [0, 1]")));
    }
    if !(d_prime > 1.0 && d_prime < epsilon * d) {
        return Err(AuditError::InvalidParams(format!(
            "need 1 < d' < epsilon d, got d' = {d_prime}, epsilon d = {}",
            epsilon * d
        )));
    }
    if g < 2 {
        return Err(AuditError::InvalidParams(format!("need g > 1, got {g}")));
    }
    let delta = (epsilon * d / d_prime - 1.0) / 5.0;
    let e = if kind == "girth" { g / 4 } else { g / 2 };
    let real_bound = delta * g as f64 * d_prime.powi(e as i32);
    let k = g / 4;
    Ok(SizeBound {
        kind: kind.to_string(),
        epsilon,
        d,
        d_prime,
        g,
        delta,
        real_bound,
        bound: real_bound.floor() as usize,
        proof_bound: 2.0 * (epsilon * d / d_prime - 1.0) * k as f64 * d_prime.powi(k as i32),
    })
}

/// Size bound for graphs of girth at least `g + 1` and left average degree
/// `d`: `delta g d'^floor(g/4)` with `delta = (eps d / d' - 1) / 5`.
pub fn girth_size_bound(epsilon: f64, d: f64, d_prime: f64, g: usize) -> Result<SizeBound, AuditError> {
    bound_inner("girth", epsilon, d, d_prime, g)
}

/// Same for `g`-bicycle-free graphs, exponent `floor(g/2)`.
pub fn bicycle_size_bound(epsilon: f64, d: f64, d_prime: f64, g: usize) -> Result<SizeBound, AuditError> {
    bound_inner("bicycle", epsilon, d, d_prime, g)
}

/// Picks `d'` on a fine grid of `(1, eps d)` maximizing the bound.
pub fn best_girth_bound(epsilon: f64, d: f64, g: usize) -> Result<SizeBound, AuditError> {
    let hi = epsilon * d;
    if hi <= 1.0 {
        return Err(AuditError::InvalidParams(format!(
            "no d' satisfies 1 < d' < epsilon d = {hi}"
        )));
    }
    const STEPS: usize = 10_000;
    let mut best: Option<SizeBound> = None;
    for i in 1..STEPS {
        let dp = 1.0 + (hi - 1.0) * i as f64 / STEPS as f64;
        let b = girth_size_bound(epsilon, d, dp, g)?;
        if best.as_ref().is_none_or(|x| b.real_bound > x.real_bound) {
            best = Some(b);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Worst set of a given size: smallest value, ties to the lexicographically
/// smaller set.
#[derive(Clone, Debug)]
struct Worst {
    value: usize,
    set: Vec<usize>,
    checked: u64,
}

fn merge(a: Option<Worst>, b: Option<Worst>) -> Option<Worst> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let checked = x.checked + y.checked;
            let keep_x = match x.value.cmp(&y.value) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => x.set <= y.set,
            };
            let mut w = if keep_x { x } else { y };
            w.checked = checked;
            Some(w)
        }
    }
}

fn observe(acc: &mut Option<Worst>, value: usize, set: &[usize]) {
    match acc {
        Some(w) => {
            w.checked += 1;
            if value < w.value || (value == w.value && set < w.set.as_slice()) {
                w.value = value;
                w.set.clear();
                w.set.extend_from_slice(set);
            }
        }
        None => {
            *acc = Some(Worst {
                value,
                set: set.to_vec(),
                checked: 1,
            })
        }
    }
}

fn checked_counts(g: &DenseBipartiteGraph, side: Side, s: &[usize], scratch: &mut Scratch) -> NeighborCounts {
    let c = count_neighbors(g, side, s, scratch);
    assert!(
        c.unique <= c.neighbors && c.neighbors <= c.incidences,
        "neighbor envelope violated for {s:?}"
    );
    c
}

const CHUNKS: u128 = 512;

/// Worst value of `metric` over all `t`-subsets of `side`, or over
/// `opts.samples` uniform samples when there are more than `opts.budget`.
pub(crate) fn worst_subset<M>(
    g: &DenseBipartiteGraph,
    side: Side,
    t: usize,
    opts: &AuditOptions,
    stream: u64,
    metric: M,
) -> (Mode, u64, usize, Vec<usize>)
where
    M: Fn(&NeighborCounts) -> usize + Sync + Send,
{
    let n = g.side_len(side);
    let other = g.side_len(side.opposite());
    let total = subsets::binomial(n, t);
    let (mode, worst) = if total <= opts.budget {
        let chunks = total.clamp(1, CHUNKS);
        let w = par::map_reduce_init(
            chunks as usize,
            || Scratch::new(other),
            |scratch, c| {
                let start = total * c as u128 / chunks;
                let end = total * (c as u128 + 1) / chunks;
                let mut acc = None;
                subsets::for_each_in_range(n, t, start, end, |s| {
                    let v = metric(&checked_counts(g, side, s, scratch));
                    observe(&mut acc, v, s);
                });
                acc
            },
            || None,
            merge,
        );
        (Mode::Exhaustive, w)
    } else {
        let w = par::map_reduce_init(
            opts.samples,
            || Scratch::new(other),
            |scratch, i| {
                let mut rng = seeds::rng(opts.seed, &[stream, t as u64, i as u64]);
                let s = subsets::sample(&mut rng, n, t);
                let v = metric(&checked_counts(g, side, &s, scratch));
                Some(Worst {
                    value: v,
                    set: s,
                    checked: 1,
                })
            },
            || None,
            merge,
        );
        (Mode::Sampled, w)
    };
    let w = worst.expect("at least one subset per size");
    (mode, w.checked, w.value, w.set)
}

/// Checks the threshold for every size `1..=size_bound` (capped by the side
/// size).
pub fn expansion_audit(
    g: &DenseBipartiteGraph,
    side: Side,
    size_bound: usize,
    threshold: Threshold,
    opts: &AuditOptions,
) -> AuditReport {
    let start = Instant::now();
    let d = g.average_degree(side);
    let n = g.side_len(side);
    let stream = seeds::tag(match side {
        Side::Left => "audit-left",
        Side::Right => "audit-right",
    });
    let sizes: Vec<SizeResult> = (1..=size_bound.min(n))
        .map(|t| {
            let (mode, checked, value, set) =
                worst_subset(g, side, t, opts, stream, |c| threshold.value(c));
            let required = threshold.required(d, t);
            let pass = value as f64 >= required - 1e-9;
            let witness = (!pass).then(|| {
                let replay = threshold.value(&count_neighbors(g, side, &set, &mut Scratch::new(0)));
                assert!((replay as f64) < required - 1e-9, "witness did not replay");
                set.clone()
            });
            SizeResult {
                size: t,
                mode,
                checked,
                worst_value: value,
                worst_ratio: value as f64 / t as f64,
                required,
                worst_set: set,
                pass,
                witness,
            }
        })
        .collect();
    AuditReport {
        kind: "expansion".into(),
        graph_checksum: g.checksum(),
        side,
        degree: d,
        threshold,
        size_bound,
        bound: None,
        vacuous: sizes.is_empty(),
        pass: sizes.iter().all(|s| s.pass),
        sizes,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Audit of `|N(S)| >= (1 - eps) d |S|` up to the girth-derived size bound.
/// `d'` is chosen to maximize the bound unless given.
pub fn girth_expansion_audit(
    g: &DenseBipartiteGraph,
    side: Side,
    epsilon: f64,
    d_prime: Option<f64>,
    girth: usize,
    opts: &AuditOptions,
) -> Result<AuditReport, AuditError> {
    let d = g.average_degree(side);
    let gg = girth.saturating_sub(1);
    let bound = match d_prime {
        Some(dp) => girth_size_bound(epsilon, d, dp, gg)?,
        None => best_girth_bound(epsilon, d, gg)?,
    };
    let mut report = expansion_audit(
        g,
        side,
        bound.bound,
        Threshold::NeighborRatio { epsilon },
        opts,
    );
    report.bound = Some(bound);
    Ok(report)
}
