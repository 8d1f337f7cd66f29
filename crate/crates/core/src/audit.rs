//! Audit specs: the JSON document `forge verify` reads, and the runner that
//! dispatches each named audit to [`crate::verify`].

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::graph::{DenseBipartiteGraph, Side};
use crate::recipe::RunError;
use crate::seeds;
use crate::verify::expansion::{self, AuditOptions, Threshold};
use crate::verify::girth;
use crate::verify::spectral::{self, Method, SpectralOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AuditItem {
    /// Exact bidegrees, or just biregularity when both are omitted.
    Biregular {
        #[serde(default)]
        left: Option<usize>,
        #[serde(default)]
        right: Option<usize>,
    },
    EdgeCount { expected: usize },
    Girth {
        #[serde(default)]
        min: Option<usize>,
    },
    Spectral {
        #[serde(default)]
        max_lambda2: Option<f64>,
        #[serde(default)]
        method: Option<Method>,
    },
    BicycleFree { radius: usize },
    Expansion {
        side: Side,
        max_size: usize,
        threshold: Threshold,
        #[serde(default)]
        samples: Option<usize>,
        #[serde(default)]
        budget: Option<u64>,
    },
    /// Neighbor expansion up to the size bound implied by the girth.
    GirthExpansion {
        side: Side,
        epsilon: f64,
        #[serde(default)]
        d_prime: Option<f64>,
        /// Measured when omitted.
        #[serde(default)]
        girth: Option<usize>,
    },
    /// Sampled `|UN(S)| >= min` for sizes `1..=max_size`.
    UniqueNeighborSample {
        side: Side,
        max_size: usize,
        #[serde(default = "one")]
        min: usize,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

fn one() -> usize {
    1
}

fn default_samples() -> usize {
    10_000
}

impl AuditItem {
    pub fn name(&self) -> &'static str {
        match self {
            AuditItem::Biregular { .. } => "biregular",
            AuditItem::EdgeCount { .. } => "edge-count",
            AuditItem::Girth { .. } => "girth",
            AuditItem::Spectral { .. } => "spectral",
            AuditItem::BicycleFree { .. } => "bicycle-free",
            AuditItem::Expansion { .. } => "expansion",
            AuditItem::GirthExpansion { .. } => "girth-expansion",
            AuditItem::UniqueNeighborSample { .. } => "unique-neighbor-sample",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSpec {
    pub audits: Vec<AuditItem>,
    #[serde(default)]
    pub seed: u64,
    /// Report path, relative to the spec file. Defaults to `<graph>.report.json`.
    #[serde(default)]
    pub report: Option<String>,
}

impl AuditSpec {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::precondition("audit spec", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub kind: String,
    pub pass: bool,
    pub detail: Value,
    #[serde(skip)]
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub graph_checksum: String,
    pub n_left: usize,
    pub n_right: usize,
    pub edges: usize,
    pub audits: Vec<AuditOutcome>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Removes every `wall_time_ms` entry so reports stay byte-stable.
fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    let mut v = serde_json::to_value(t).expect("report serializes");
    strip_timing(&mut v);
    v
}

pub fn run_audit(g: &DenseBipartiteGraph, item: &AuditItem, seed: u64) -> Result<AuditOutcome, RunError> {
    let start = Instant::now();
    let ctx = item.name();
    let (pass, detail) = match item {
        AuditItem::Biregular { left, right } => {
            let degrees = g.biregular_degrees();
            let pass = match degrees {
                None => false,
                Some((l, r)) => left.is_none_or(|x| x == l) && right.is_none_or(|x| x == r),
            };
            (
                pass,
                json!({
                    "degrees": degrees,
                    "expected_left": left,
                    "expected_right": right,
                    "left_degree_range": degree_range(g, Side::Left),
                    "right_degree_range": degree_range(g, Side::Right),
                }),
            )
        }
        AuditItem::EdgeCount { expected } => {
            let m = g.num_edges();
            (m == *expected, json!({ "edges": m, "expected": expected }))
        }
        AuditItem::Girth { min } => {
            let value = girth::girth(&g.to_graph());
            let pass = match (min, value) {
                (None, _) => true,
                (Some(_), None) => true,
                (Some(m), Some(v)) => v >= *m,
            };
            (pass, json!({ "value": value, "min": min }))
        }
        AuditItem::Spectral { max_lambda2, method } => {
            let opts = SpectralOptions {
                force: *method,
                seed: seeds::derive(seed, &[seeds::tag("spectral")]),
                ..SpectralOptions::default()
            };
            let report = spectral::lambda2_bipartite_with(g, &opts).map_err(|e| RunError::precondition(ctx, e))?;
            let pass = max_lambda2.is_none_or(|b| report.lambda2 <= b);
            (pass, json!({ "report": to_value(&report), "max_lambda2": max_lambda2 }))
        }
        AuditItem::BicycleFree { radius } => {
            let report = girth::is_bicycle_free(&g.to_graph(), *radius);
            (report.bicycle_free, to_value(&report))
        }
        AuditItem::Expansion {
            side,
            max_size,
            threshold,
            samples,
            budget,
        } => {
            let mut opts = audit_options(seed);
            if let Some(s) = samples {
                opts.samples = *s;
            }
            if let Some(b) = budget {
                opts.budget = *b as u128;
            }
            let report = expansion::expansion_audit(g, *side, *max_size, threshold.clone(), &opts);
            (report.pass, to_value(&report))
        }
        AuditItem::GirthExpansion {
            side,
            epsilon,
            d_prime,
            girth: given,
        } => {
            let measured = match given {
                Some(v) => *v,
                None => girth::girth(&g.to_graph()).ok_or_else(|| RunError::precondition(ctx, "graph is acyclic"))?,
            };
            let report = expansion::girth_expansion_audit(g, *side, *epsilon, *d_prime, measured, &audit_options(seed))
                .map_err(|e| RunError::precondition(ctx, e))?;
            (report.pass, to_value(&report))
        }
        AuditItem::UniqueNeighborSample {
            side,
            max_size,
            min,
            samples,
        } => {
            // budget 0 forces sampling even for singletons
            let opts = AuditOptions {
                budget: 0,
                samples: *samples,
                ..audit_options(seed)
            };
            let report = expansion::expansion_audit(
                g,
                *side,
                *max_size,
                Threshold::UniqueNeighborCount { min: *min },
                &opts,
            );
            (report.pass, to_value(&report))
        }
    };
    Ok(AuditOutcome {
        kind: ctx.to_string(),
        pass,
        detail,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn audit_options(seed: u64) -> AuditOptions {
    AuditOptions {
        seed: seeds::derive(seed, &[seeds::tag("audit")]),
        ..AuditOptions::default()
    }
}

fn degree_range(g: &DenseBipartiteGraph, side: Side) -> Option<(usize, usize)> {
    let adj = g.adjacency(side);
    let min = adj.iter().map(Vec::len).min()?;
    let max = adj.iter().map(Vec::len).max()?;
    Some((min, max))
}

/// Runs every audit in order. Precondition errors abort the whole run.
pub fn run_audits(g: &DenseBipartiteGraph, spec: &AuditSpec) -> Result<VerifyReport, RunError> {
    let audits = spec
        .audits
        .iter()
        .enumerate()
        .map(|(i, item)| run_audit(g, item, seeds::derive(spec.seed, &[i as u64])))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VerifyReport {
        graph_checksum: g.checksum(),
        n_left: g.n_left(),
        n_right: g.n_right(),
        edges: g.num_edges(),
        pass: audits.iter().all(|a| a.pass),
        audits,
    })
}
