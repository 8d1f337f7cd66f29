//! Random `(d1, d2)`-biregular gadgets and their two-sided unique-neighbor
//! certificates.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DenseBipartiteGraph, Side};
use crate::io::{self, FormatError};
use crate::{par, seeds};
use crate::verify::expansion::{worst_subset, AuditOptions};
use crate::verify::Mode;

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error("invalid gadget spec: {0}")]
    InvalidSpec(String),
    #[error("no simple graph after {attempts} configuration-model draws")]
    SamplingBudget { attempts: usize },
    #[error("no passing gadget in {attempts} attempts (best margin {:.4})", best.margin)]
    BudgetExhausted {
        attempts: usize,
        best: Box<GadgetCertificate>,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("catalog: {0}")]
    Catalog(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// `(1 - delta) d exp(-p t)`
    #[default]
    Exponential,
    /// `p (1-p)^(t-1) n - sqrt(4 p (1-p)^(t-1) n ln n')`
    TailBound,
}

fn default_samples() -> usize {
    10_000
}

fn default_budget() -> u128 {
    2_000_000
}

// (6,6)-biregular on 24+24 vertices accepts about one draw in 270k
fn default_restarts() -> usize {
    10_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub n1: usize,
    pub n2: usize,
    pub d1: usize,
    pub d2: usize,
    /// Size-range constant: sets up to `C n_other / d` are checked.
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    pub t_exhaustive: usize,
    #[serde(default = "default_samples")]
    pub samples_per_size: usize,
    pub max_attempts: usize,
    pub seed: u64,
    #[serde(default)]
    pub threshold_mode: ThresholdMode,
    /// Largest subset count enumerated exhaustively for one size.
    #[serde(default = "default_budget")]
    pub enumeration_budget: u128,
    /// Configuration-model restarts allowed per sample.
    #[serde(default = "default_restarts")]
    pub max_restarts: usize,
}

impl GadgetSpec {
    /// Spec with the usual defaults for the optional fields.
    pub fn new(n1: usize, n2: usize, d1: usize, d2: usize, c: f64, delta: f64) -> Self {
        GadgetSpec {
            n1,
            n2,
            d1,
            d2,
            c,
            delta,
            t_exhaustive: 3,
            samples_per_size: default_samples(),
            max_attempts: 1000,
            seed: 0,
            threshold_mode: ThresholdMode::Exponential,
            enumeration_budget: default_budget(),
            max_restarts: default_restarts(),
        }
    }

    pub fn validate(&self) -> Result<(), GadgetError> {
        let bad = |m: String| Err(GadgetError::InvalidSpec(m));
        if self.n1 == 0 || self.n2 == 0 || self.d1 == 0 || self.d2 == 0 {
            return bad("sizes and degrees must be positive".into());
        }
        if self.n1 * self.d1 != self.n2 * self.d2 {
            return bad(format!(
                "n1 d1 = {} differs from n2 d2 = {}",
                self.n1 * self.d1,
                self.n2 * self.d2
            ));
        }
        if self.d1 > self.n2 || self.d2 > self.n1 {
            return bad("degree exceeds the opposite side".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} outside (0, 1)", self.delta));
        }
        if self.c.is_nan() || self.c <= 0.0 {
            return bad(format!("C = {} must be positive", self.c));
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        Ok(())
    }

    /// Edge density `p = d1 / n2 = d2 / n1`.
    pub fn p(&self) -> f64 {
        self.d1 as f64 / self.n2 as f64
    }

    /// `(degree, own side size, other side size)` for sets on `side`.
    fn side_params(&self, side: Side) -> (usize, usize, usize) {
        match side {
            Side::Left => (self.d1, self.n1, self.n2),
            Side::Right => (self.d2, self.n2, self.n1),
        }
    }

    /// Largest checked size on `side`: `floor(C n_other / d)`, capped.
    pub fn max_size(&self, side: Side) -> usize {
        let (d, own, other) = self.side_params(side);
        ((self.c * other as f64 / d as f64).floor() as usize).min(own)
    }

    pub fn threshold(&self, side: Side, t: usize) -> f64 {
        let p = self.p();
        let (d, _, other) = self.side_params(side);
        match self.threshold_mode {
            ThresholdMode::Exponential => (1.0 - self.delta) * d as f64 * (-p * t as f64).exp(),
            ThresholdMode::TailBound => {
                // sets on one side expand into the other, of size `other`;
                // the log term uses the set's own side
                let own = match side {
                    Side::Left => self.n1,
                    Side::Right => self.n2,
                };
                let mean = p * (1.0 - p).powi(t as i32 - 1) * other as f64;
                mean - (4.0 * mean * (own as f64).ln()).sqrt()
            }
        }
    }

    pub fn catalog_key(&self) -> String {
        format!(
            "n1-{}_n2-{}_d1-{}_d2-{}_seed-{}",
            self.n1, self.n2, self.d1, self.d2, self.seed
        )
    }
}

/// Uniformly random simple `(d1, d2)`-biregular graph: stubs are matched one
/// at a time and the draw restarts as soon as a repeated pair appears, which
/// is the configuration model conditioned on simplicity. Fails after
/// `max_restarts` rejected draws.
pub fn sample_biregular<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    d1: usize,
    d2: usize,
    rng: &mut R,
    max_restarts: usize,
) -> Result<DenseBipartiteGraph, GadgetError> {
    if n1 * d1 != n2 * d2 {
        return Err(GadgetError::InvalidSpec(format!(
            "n1 d1 = {} differs from n2 d2 = {}",
            n1 * d1,
            n2 * d2
        )));
    }
    // partial Fisher-Yates over a persistent stub array: any permutation is a
    // valid starting point, so nothing is reset between draws
    let mut stubs: Vec<usize> = (0..n2).flat_map(|v| std::iter::repeat_n(v, d2)).collect();
    let total = stubs.len();
    // seen[v] holds the (draw, left vertex) stamp of v's latest pairing
    let mut seen = vec![usize::MAX; n2];
    'draw: for draw in 0..max_restarts.max(1) {
        for u in 0..n1 {
            let stamp = draw * n1 + u;
            for i in u * d1..(u + 1) * d1 {
                let k = rng.gen_range(i..total);
                stubs.swap(i, k);
                let v = stubs[i];
                if seen[v] == stamp {
                    continue 'draw;
                }
                seen[v] = stamp;
            }
        }
        let adj = (0..n1)
            .map(|u| {
                let mut row = stubs[u * d1..(u + 1) * d1].to_vec();
                row.sort_unstable();
                row
            })
            .collect();
        return Ok(DenseBipartiteGraph::from_left_adjacency(n2, adj).expect("stub indices in range"));
    }
    Err(GadgetError::SamplingBudget {
        attempts: max_restarts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetSize {
    pub size: usize,
    pub mode: Mode,
    pub checked: u64,
    pub worst_unique: usize,
    pub worst_ratio: f64,
    pub threshold: f64,
    pub worst_set: Vec<usize>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideCertificate {
    pub side: Side,
    pub degree: usize,
    pub max_size: usize,
    pub sizes: Vec<GadgetSize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetCertificate {
    pub graph_checksum: String,
    pub spec: GadgetSpec,
    pub p: f64,
    pub sides: Vec<SideCertificate>,
    /// Smallest `worst_ratio / threshold` over all checked sizes.
    pub margin: f64,
    pub pass: bool,
}

/// Checks both sides of `h` against the spec's thresholds. Sizes up to
/// `t_exhaustive` are enumerated when within the budget; the rest are sampled
/// with streams derived from the spec seed.
pub fn check_gadget(h: &DenseBipartiteGraph, spec: &GadgetSpec) -> GadgetCertificate {
    let mut sides = Vec::new();
    let mut margin = f64::INFINITY;
    for side in [Side::Left, Side::Right] {
        let (d, _, _) = spec.side_params(side);
        let max_size = spec.max_size(side);
        let stream = seeds::tag(match side {
            Side::Left => "gadget-left",
            Side::Right => "gadget-right",
        });
        let sizes = (1..=max_size)
            .map(|t| {
                let opts = AuditOptions {
                    budget: if t <= spec.t_exhaustive {
                        spec.enumeration_budget
                    } else {
                        0
                    },
                    samples: spec.samples_per_size,
                    seed: spec.seed,
                };
                let (mode, checked, worst, set) = worst_subset(h, side, t, &opts, stream, |c| c.unique);
                let threshold = spec.threshold(side, t);
                let ratio = worst as f64 / t as f64;
                if threshold > 0.0 {
                    margin = margin.min(ratio / threshold);
                }
                GadgetSize {
                    size: t,
                    mode,
                    checked,
                    worst_unique: worst,
                    worst_ratio: ratio,
                    threshold,
                    worst_set: set,
                    pass: ratio >= threshold,
                }
            })
            .collect();
        sides.push(SideCertificate {
            side,
            degree: d,
            max_size,
            sizes,
        });
    }
    let pass = sides.iter().all(|s| s.sizes.iter().all(|z| z.pass));
    GadgetCertificate {
        graph_checksum: h.checksum(),
        spec: spec.clone(),
        p: spec.p(),
        sides,
        margin,
        pass,
    }
}

#[derive(Clone, Debug)]
pub struct GadgetSearch {
    pub graph: DenseBipartiteGraph,
    pub certificate: GadgetCertificate,
    /// Zero-based index of the passing attempt.
    pub attempt: usize,
}

/// Samples and checks gadgets until one passes. Attempt `i` draws from the
/// stream `(seed, "gadget", i)`, so batches of attempts run in parallel and are
/// scanned in order; the result matches a sequential search.
pub fn search_gadget(spec: &GadgetSpec) -> Result<GadgetSearch, GadgetError> {
    spec.validate()?;
    let batch = 4 * par::workers();
    let mut best: Option<GadgetCertificate> = None;
    let mut start = 0;
    while start < spec.max_attempts {
        let len = batch.min(spec.max_attempts - start);
        let results = par::map_collect(len, |i| {
            let mut rng = seeds::stage_rng(spec.seed, "gadget", (start + i) as u64);
            let graph = sample_biregular(spec.n1, spec.n2, spec.d1, spec.d2, &mut rng, spec.max_restarts)?;
            let certificate = check_gadget(&graph, spec);
            Ok::<_, GadgetError>((graph, certificate))
        });
        for (i, result) in results.into_iter().enumerate() {
            let (graph, certificate) = result?;
            if certificate.pass {
                return Ok(GadgetSearch {
                    graph,
                    certificate,
                    attempt: start + i,
                });
            }
            if best.as_ref().is_none_or(|b| certificate.margin > b.margin) {
                best = Some(certificate);
            }
        }
        start += len;
    }
    Err(GadgetError::BudgetExhausted {
        attempts: spec.max_attempts,
        best: Box::new(best.expect("at least one attempt")),
    })
}

fn catalog_paths(dir: &Path, spec: &GadgetSpec) -> (PathBuf, PathBuf) {
    let key = spec.catalog_key();
    (dir.join(format!("{key}.graph")), dir.join(format!("{key}.certificate.json")))
}

/// Stores a gadget and its certificate under the spec's catalog key.
pub fn catalog_store(dir: &Path, graph: &DenseBipartiteGraph, cert: &GadgetCertificate) -> Result<(), GadgetError> {
    fs::create_dir_all(dir).map_err(|e| GadgetError::Catalog(e.to_string()))?;
    let (gp, cp) = catalog_paths(dir, &cert.spec);
    let cert_name = cp.file_name().unwrap().to_string_lossy().into_owned();
    io::write_graph_file(&gp, graph, &cert_name)?;
    let json = serde_json::to_string_pretty(cert).expect("certificate serializes");
    fs::write(&cp, json + "\n").map_err(|e| GadgetError::Catalog(e.to_string()))
}

/// Loads a cataloged gadget, re-checking it against the stored checksum.
pub fn catalog_load(dir: &Path, spec: &GadgetSpec) -> Result<Option<(DenseBipartiteGraph, GadgetCertificate)>, GadgetError> {
    let (gp, cp) = catalog_paths(dir, spec);
    if !gp.exists() || !cp.exists() {
        return Ok(None);
    }
    let (graph, _) = io::read_graph_file(&gp)?;
    let text = fs::read_to_string(&cp).map_err(|e| GadgetError::Catalog(e.to_string()))?;
    let cert: GadgetCertificate = serde_json::from_str(&text).map_err(|e| GadgetError::Catalog(e.to_string()))?;
    if cert.graph_checksum != graph.checksum() || &cert.spec != spec {
        return Err(GadgetError::Catalog(format!("{} does not match its certificate", gp.display())));
    }
    Ok(Some((graph, cert)))
}
