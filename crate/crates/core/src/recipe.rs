//! Recipes, manifests, and the construct / pipeline drivers behind the `forge`
//! binary.
//!
//! A recipe is a JSON object with a `kind` tag, kind-specific parameters, a
//! `seed` and an `output` path (resolved against the recipe's directory).
//! `construct` writes one graph file plus `<output>.manifest.json`;
//! `pipeline` writes a bundle directory holding every factor graph, the
//! audit reports and a `summary.json`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audit::{self, AuditItem, AuditOutcome};
use crate::dkq::{CdGraph, CdParams, Dkq};
use crate::gadget::{self, GadgetError, GadgetSpec, ThresholdMode};
use crate::graph::{DenseBipartiteGraph, ExplicitBipartiteGraph, Graph, Side};
use crate::io;
use crate::lps;
use crate::seeds;
use crate::transforms;
use crate::verify::girth;
use crate::verify::spectral::Method;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{context}: {message}")]
    Precondition { context: String, message: String },
    #[error("{context}: {message}")]
    Io { context: String, message: String },
    #[error("{stage}: {message}")]
    Failed { stage: String, message: String },
}

impl RunError {
    pub fn precondition(context: impl Into<String>, e: impl Display) -> Self {
        RunError::Precondition {
            context: context.into(),
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: impl Display) -> Self {
        RunError::Io {
            context: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// 1 for a failed check, 2 for anything that stopped the check running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Failed { .. } => 1,
            _ => 2,
        }
    }
}

/// Plain graphs usable as edge-vertex incidence bases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "graph", rename_all = "kebab-case")]
pub enum BaseGraph {
    Complete { n: usize },
    Cycle { n: usize },
    Petersen,
    Lps { p: u64, q: u64 },
}

impl BaseGraph {
    fn build(&self) -> Result<Graph, RunError> {
        Ok(match *self {
            BaseGraph::Complete { n } => Graph::complete(n),
            BaseGraph::Cycle { n } => Graph::cycle(n),
            BaseGraph::Petersen => Graph::petersen(),
            BaseGraph::Lps { p, q } => {
                let g = lps::lps_graph(p, q).map_err(|e| RunError::precondition("lps", e))?;
                materialize("lps", &g)?.to_graph()
            }
        })
    }
}

/// Gadget parameters. `n1` and `n2` are required for a standalone gadget and
/// derived from the factor degrees inside composites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetParams {
    #[serde(default)]
    pub n1: Option<usize>,
    #[serde(default)]
    pub n2: Option<usize>,
    pub d1: usize,
    pub d2: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    #[serde(default)]
    pub t_exhaustive: Option<usize>,
    #[serde(default)]
    pub samples_per_size: Option<usize>,
    #[serde(default)]
    pub max_attempts: Option<usize>,
    #[serde(default)]
    pub threshold_mode: Option<ThresholdMode>,
}

impl GadgetParams {
    fn spec(&self, n1: Option<usize>, n2: Option<usize>, seed: u64) -> Result<GadgetSpec, RunError> {
        let pick = |given: Option<usize>, forced: Option<usize>, name: &str| match (given, forced) {
            (Some(a), Some(b)) if a != b => Err(RunError::precondition(
                "gadget",
                format!("{name} = {a} but the factors require {b}"),
            )),
            (_, Some(b)) => Ok(b),
            (Some(a), None) => Ok(a),
            (None, None) => Err(RunError::precondition("gadget", format!("{name} is required"))),
        };
        let mut spec = GadgetSpec::new(
            pick(self.n1, n1, "n1")?,
            pick(self.n2, n2, "n2")?,
            self.d1,
            self.d2,
            self.c,
            self.delta,
        );
        spec.seed = seed;
        if let Some(t) = self.t_exhaustive {
            spec.t_exhaustive = t;
        }
        if let Some(s) = self.samples_per_size {
            spec.samples_per_size = s;
        }
        if let Some(a) = self.max_attempts {
            spec.max_attempts = a;
        }
        if let Some(m) = self.threshold_mode {
            spec.threshold_mode = m;
        }
        spec.validate().map_err(|e| RunError::precondition("gadget", e))?;
        Ok(spec)
    }
}

fn half() -> f64 {
    0.5
}

fn four() -> usize {
    4
}

fn two() -> usize {
    2
}

fn resamples() -> usize {
    200
}

fn slack() -> f64 {
    0.1
}

fn un_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RecipeKind {
    Dkq {
        k: usize,
        q: u64,
    },
    Cd {
        k: usize,
        q: u64,
        a: Vec<u64>,
        b: Vec<u64>,
    },
    Lps {
        p: u64,
        q: u64,
    },
    /// `(2, d)` incidence graph, or `(d, 2)` with `transpose`.
    EdgeIncidence {
        base: BaseGraph,
        #[serde(default)]
        transpose: bool,
    },
    /// Product of three graph files, paths relative to the recipe.
    Tripartite {
        g1: PathBuf,
        g2: PathBuf,
        g0: PathBuf,
    },
    Gadget(GadgetParams),
    /// `CD(k, q, [1, d1], [1, d2])`.
    #[serde(rename = "composite-4.9")]
    Composite49 {
        k: usize,
        q: u64,
        d1: u64,
        d2: u64,
        #[serde(default = "half")]
        epsilon: f64,
    },
    /// LPS factor, a random biregular factor resampled until bicycle-free,
    /// and a gadget.
    #[serde(rename = "composite-5.7")]
    Composite57 {
        p: u64,
        q: u64,
        /// Right degree of the random factor; its left degree is `p + 1`.
        d_right: usize,
        #[serde(default = "two")]
        bicycle_radius: usize,
        #[serde(default = "resamples")]
        max_resamples: usize,
        /// Allowed relative excess of the random factor's second eigenvalue
        /// over the biregular Ramanujan bound.
        #[serde(default = "slack")]
        ramanujan_slack: f64,
        gadget: GadgetParams,
        #[serde(default = "four")]
        audit_max_size: usize,
        #[serde(default = "un_samples")]
        audit_samples: usize,
    },
    /// Incidence graphs of two LPS graphs joined through a gadget.
    #[serde(rename = "composite-6.10")]
    Composite610 {
        p_a: u64,
        p_b: u64,
        q: u64,
        gadget: GadgetParams,
        #[serde(default = "four")]
        audit_max_size: usize,
        #[serde(default = "un_samples")]
        audit_samples: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    #[serde(flatten)]
    pub kind: RecipeKind,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
}

impl Recipe {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::precondition("recipe", e))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            RunError::Precondition { message, .. } => RunError::Precondition {
                context: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn kind_name(&self) -> String {
        serde_json::to_value(&self.kind).expect("recipe serializes")["kind"]
            .as_str()
            .expect("tagged")
            .to_string()
    }
}

/// A named graph with its manifest, as written to disk.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub graph: DenseBipartiteGraph,
    pub manifest: Value,
}

/// Receives artifacts as they are produced, so a failing stage leaves the
/// earlier ones behind.
pub trait Sink {
    fn graph(&mut self, artifact: &Artifact) -> Result<(), RunError>;
    fn document(&mut self, name: &str, doc: &Value) -> Result<(), RunError>;
}

pub struct Discard;

impl Sink for Discard {
    fn graph(&mut self, _: &Artifact) -> Result<(), RunError> {
        Ok(())
    }

    fn document(&mut self, _: &str, _: &Value) -> Result<(), RunError> {
        Ok(())
    }
}

/// Writes `<name>.graph`, `<name>.manifest.json` and `<name>.json` files into
/// one directory and remembers their file hashes.
pub struct DirSink {
    dir: PathBuf,
    artifacts: BTreeMap<String, Artifact>,
    files: BTreeMap<String, String>,
}

impl DirSink {
    pub fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(DirSink {
            dir: dir.to_path_buf(),
            artifacts: BTreeMap::new(),
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| RunError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| RunError::io(&path, e))?;
        self.files.insert(rel.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.get(name)
    }
}

impl Sink for DirSink {
    fn graph(&mut self, artifact: &Artifact) -> Result<(), RunError> {
        let manifest_name = format!("{}.manifest.json", artifact.name);
        let text = io::graph_file_text(&artifact.graph, &manifest_name);
        self.write(&format!("{}.graph", artifact.name), text.as_bytes())?;
        self.write(&manifest_name, &json_bytes(&artifact.manifest))?;
        self.artifacts.insert(artifact.name.clone(), artifact.clone());
        Ok(())
    }

    fn document(&mut self, name: &str, doc: &Value) -> Result<(), RunError> {
        self.write(&format!("{name}.json"), &json_bytes(doc))
    }
}

pub fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn materialize<G: ExplicitBipartiteGraph + ?Sized>(ctx: &str, g: &G) -> Result<DenseBipartiteGraph, RunError> {
    DenseBipartiteGraph::from_explicit(g).map_err(|e| RunError::precondition(ctx, e))
}

/// Biregularity check, standard manifest fields, then hand-off to the sink.
fn emit(sink: &mut dyn Sink, name: &str, graph: DenseBipartiteGraph, extra: Value) -> Result<Artifact, RunError> {
    let (dl, dr) = graph.biregular_degrees().ok_or_else(|| RunError::Failed {
        stage: name.to_string(),
        message: "graph is not biregular".into(),
    })?;
    let mut manifest = json!({
        "name": name,
        "n_left": graph.n_left(),
        "n_right": graph.n_right(),
        "edges": graph.num_edges(),
        "left_degree": dl,
        "right_degree": dr,
        "checksum": graph.checksum(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut manifest, extra) {
        m.extend(e);
    }
    let artifact = Artifact {
        name: name.to_string(),
        graph,
        manifest,
    };
    sink.graph(&artifact)?;
    Ok(artifact)
}

fn read_factor(base: &Path, rel: &Path) -> Result<DenseBipartiteGraph, RunError> {
    let path = base.join(rel);
    io::read_graph_file(&path)
        .map(|(g, _)| g)
        .map_err(|e| RunError::precondition(path.display().to_string(), e))
}

fn run_gadget(sink: &mut dyn Sink, spec: &GadgetSpec) -> Result<Artifact, RunError> {
    match gadget::search_gadget(spec) {
        Ok(found) => {
            let cert = serde_json::to_value(&found.certificate).expect("certificate serializes");
            sink.document("gadget.certificate", &cert)?;
            emit(
                sink,
                "gadget",
                found.graph,
                json!({ "attempt": found.attempt, "certificate": cert }),
            )
        }
        Err(GadgetError::BudgetExhausted { attempts, best }) => {
            sink.document("gadget.best-certificate", &serde_json::to_value(&*best).expect("serializes"))?;
            Err(RunError::Failed {
                stage: "gadget".into(),
                message: format!("no passing gadget in {attempts} attempts (best margin {:.4})", best.margin),
            })
        }
        Err(e) => Err(RunError::precondition("gadget", e)),
    }
}

fn lps_factor(sink: &mut dyn Sink, name: &str, p: u64, q: u64) -> Result<Artifact, RunError> {
    let g = lps::lps_graph(p, q).map_err(|e| RunError::precondition(name, e))?;
    let manifest = serde_json::to_value(g.manifest()).expect("serializes");
    emit(sink, name, materialize(name, &g)?, json!({ "lps": manifest }))
}

fn product(
    sink: &mut dyn Sink,
    g1: &DenseBipartiteGraph,
    g2: &DenseBipartiteGraph,
    g0: &DenseBipartiteGraph,
    extra: Value,
) -> Result<Artifact, RunError> {
    let p = transforms::tripartite_product(g1, g2, g0).map_err(|e| RunError::precondition("tripartite", e))?;
    emit(sink, "product", p, extra)
}

/// Builds the recipe's graph, pushing intermediate factors into `sink`.
/// Relative paths inside the recipe resolve against `base`.
pub fn build(recipe: &Recipe, base: &Path, sink: &mut dyn Sink) -> Result<Artifact, RunError> {
    let seed = recipe.seed;
    match &recipe.kind {
        RecipeKind::Dkq { k, q } => {
            let g = Dkq::new(*k, *q).map_err(|e| RunError::precondition("dkq", e))?;
            emit(sink, "dkq", materialize("dkq", &g)?, json!({ "k": k, "q": q }))
        }
        RecipeKind::Cd { k, q, a, b } => cd(sink, "cd", *k, *q, a, b),
        RecipeKind::Composite49 { k, q, d1, d2, .. } => {
            let a: Vec<u64> = (1..=*d1).collect();
            let b: Vec<u64> = (1..=*d2).collect();
            cd(sink, "cd", *k, *q, &a, &b)
        }
        RecipeKind::Lps { p, q } => lps_factor(sink, "lps", *p, *q),
        RecipeKind::EdgeIncidence { base: bg, transpose } => {
            let g = bg.build()?;
            let h = transforms::edge_vertex_incidence(&g).map_err(|e| RunError::precondition("edge-incidence", e))?;
            let h = if *transpose { h.transpose() } else { h };
            emit(sink, "incidence", h, json!({ "base": bg, "transpose": transpose }))
        }
        RecipeKind::Tripartite { g1, g2, g0 } => {
            let (f1, f2, f0) = (read_factor(base, g1)?, read_factor(base, g2)?, read_factor(base, g0)?);
            let expected = f1.n_right() * f0.num_edges();
            product(
                sink,
                &f1,
                &f2,
                &f0,
                json!({
                    "factors": { "g1": f1.checksum(), "g2": f2.checksum(), "g0": f0.checksum() },
                    "expected_edges": expected,
                }),
            )
        }
        RecipeKind::Gadget(params) => {
            let spec = params.spec(None, None, seed)?;
            run_gadget(sink, &spec)
        }
        RecipeKind::Composite57 {
            p,
            q,
            d_right,
            bicycle_radius,
            max_resamples,
            gadget,
            ..
        } => {
            let g1 = lps_factor(sink, "lps", *p, *q)?;
            let m = g1.graph.n_right();
            let d_left = (*p + 1) as usize;
            if !(m * d_left).is_multiple_of(*d_right) {
                return Err(RunError::precondition(
                    "composite-5.7",
                    format!("{m} middle vertices of degree {d_left} cannot be split into degree-{d_right} right vertices"),
                ));
            }
            let n_right = m * d_left / d_right;
            let mut found = None;
            for attempt in 0..*max_resamples {
                let mut rng = seeds::stage_rng(seed, "bicycle-free-factor", attempt as u64);
                let g = gadget::sample_biregular(m, n_right, d_left, *d_right, &mut rng, 100_000)
                    .map_err(|e| RunError::precondition("random factor", e))?;
                if girth::is_bicycle_free(&g.to_graph(), *bicycle_radius).bicycle_free {
                    found = Some((attempt, g));
                    break;
                }
            }
            let (attempt, g2) = found.ok_or_else(|| RunError::Failed {
                stage: "random factor".into(),
                message: format!("no {bicycle_radius}-bicycle-free sample in {max_resamples} draws"),
            })?;
            let g2 = emit(
                sink,
                "random-factor",
                g2,
                json!({
                    "substitution": {
                        "flagged": true,
                        "replaces": "explicit near-Ramanujan bicycle-free base graph",
                        "with": "uniform random simple biregular graph, resampled until bicycle-free",
                        "bicycle_radius": bicycle_radius,
                        "attempt": attempt,
                    }
                }),
            )?;
            let spec = gadget.spec(Some(d_left), Some(d_left), seed)?;
            let g0 = run_gadget(sink, &spec)?;
            product(
                sink,
                &g1.graph,
                &g2.graph,
                &g0.graph,
                json!({
                    "substitution_flagged": true,
                    "expected_edges": m * g0.graph.num_edges(),
                }),
            )
        }
        RecipeKind::Composite610 { p_a, p_b, q, gadget, .. } => {
            let la = lps_factor(sink, "lps-a", *p_a, *q)?;
            let lb = lps_factor(sink, "lps-b", *p_b, *q)?;
            let ha = transforms::edge_vertex_incidence(&la.graph.to_graph())
                .map_err(|e| RunError::precondition("incidence-a", e))?;
            let hb = transforms::edge_vertex_incidence(&lb.graph.to_graph())
                .map_err(|e| RunError::precondition("incidence-b", e))?
                .transpose();
            let ha = emit(sink, "incidence-a", ha, json!({ "base": "lps-a" }))?;
            let hb = emit(sink, "incidence-b", hb, json!({ "base": "lps-b", "transpose": true }))?;
            let spec = gadget.spec(Some((*p_a + 1) as usize), Some((*p_b + 1) as usize), seed)?;
            let g0 = run_gadget(sink, &spec)?;
            let m = ha.graph.n_right();
            product(
                sink,
                &ha.graph,
                &hb.graph,
                &g0.graph,
                json!({ "expected_edges": m * g0.graph.num_edges() }),
            )
        }
    }
}

fn cd(sink: &mut dyn Sink, name: &str, k: usize, q: u64, a: &[u64], b: &[u64]) -> Result<Artifact, RunError> {
    let params = CdParams::new(k, q, a, b).map_err(|e| RunError::precondition(name, e))?;
    let g = CdGraph::new(params).map_err(|e| RunError::precondition(name, e))?;
    let manifest = serde_json::to_value(g.manifest()).expect("serializes");
    emit(sink, name, materialize(name, &g)?, json!({ "cd": manifest }))
}

fn base_dir(recipe_path: &Path) -> PathBuf {
    recipe_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Clone, Debug)]
pub struct ConstructOutcome {
    pub graph_path: PathBuf,
    pub manifest_path: PathBuf,
    pub checksum: String,
}

/// Builds the recipe and writes the final graph with its manifest. The
/// manifest embeds the recipe so the build can be repeated from it alone.
pub fn construct(recipe: &Recipe, base: &Path) -> Result<ConstructOutcome, RunError> {
    let artifact = build(recipe, base, &mut Discard)?;
    let graph_path = base.join(&recipe.output);
    let file_name = graph_path
        .file_name()
        .ok_or_else(|| RunError::precondition("output", "path has no file name"))?
        .to_string_lossy()
        .into_owned();
    let manifest_name = format!("{file_name}.manifest.json");
    let manifest_path = graph_path.with_file_name(&manifest_name);
    if let Some(parent) = graph_path.parent() {
        fs::create_dir_all(parent).map_err(|e| RunError::io(parent, e))?;
    }
    io::write_graph_file(&graph_path, &artifact.graph, &manifest_name)
        .map_err(|e| RunError::io(&graph_path, e))?;
    let mut manifest = artifact.manifest;
    manifest["recipe"] = serde_json::to_value(recipe).expect("recipe serializes");
    fs::write(&manifest_path, json_bytes(&manifest)).map_err(|e| RunError::io(&manifest_path, e))?;
    Ok(ConstructOutcome {
        graph_path,
        manifest_path,
        checksum: artifact.graph.checksum(),
    })
}

pub fn construct_file(recipe_path: &Path) -> Result<ConstructOutcome, RunError> {
    construct(&Recipe::load(recipe_path)?, &base_dir(recipe_path))
}

/// Audit to run on a named bundle artifact.
#[derive(Clone, Debug)]
pub struct PlannedAudit {
    pub label: String,
    pub target: String,
    pub item: AuditItem,
}

fn planned(label: &str, target: &str, item: AuditItem) -> PlannedAudit {
    PlannedAudit {
        label: label.to_string(),
        target: target.to_string(),
        item,
    }
}

/// Smallest even integer at least `4 log_p q`, the girth guaranteed for
/// bipartite LPS graphs.
pub fn lps_girth_bound(p: u64, q: u64) -> usize {
    let x = 4.0 * (q as f64).ln() / (p as f64).ln();
    let g = (x - 1e-9).ceil() as usize;
    g + g % 2
}

fn lps_audits(name: &str, p: u64, q: u64) -> Vec<PlannedAudit> {
    let d = (p + 1) as usize;
    vec![
        planned(&format!("{name}-biregular"), name, AuditItem::Biregular {
            left: Some(d),
            right: Some(d),
        }),
        planned(&format!("{name}-girth"), name, AuditItem::Girth {
            min: Some(lps_girth_bound(p, q)),
        }),
        planned(&format!("{name}-spectral"), name, AuditItem::Spectral {
            max_lambda2: Some(2.0 * (p as f64).sqrt() + 1e-6),
            method: Some(Method::Dense),
        }),
    ]
}

fn un_audits(max_size: usize, samples: usize) -> Vec<PlannedAudit> {
    [Side::Left, Side::Right]
        .into_iter()
        .map(|side| {
            let label = match side {
                Side::Left => "product-unique-neighbors-left",
                Side::Right => "product-unique-neighbors-right",
            };
            planned(label, "product", AuditItem::UniqueNeighborSample {
                side,
                max_size,
                min: 1,
                samples,
            })
        })
        .collect()
}

/// The audit suite `pipeline` runs for each recipe kind, against artifacts
/// produced by [`build`].
pub fn pipeline_audits(recipe: &Recipe, sink: &DirSink) -> Vec<PlannedAudit> {
    let edges_of = |name: &str| -> Option<usize> {
        sink.artifact(name)
            .and_then(|a| a.manifest.get("expected_edges"))
            .and_then(Value::as_u64)
            .map(|e| e as usize)
    };
    match &recipe.kind {
        RecipeKind::Dkq { k, q } => vec![
            planned("dkq-biregular", "dkq", AuditItem::Biregular {
                left: Some(*q as usize),
                right: Some(*q as usize),
            }),
            planned("dkq-girth", "dkq", AuditItem::Girth { min: Some(k + 4) }),
        ],
        RecipeKind::Cd { k, a, b, .. } => cd_audits(*k, a.len(), b.len(), 0.5),
        RecipeKind::Composite49 { k, d1, d2, epsilon, .. } => cd_audits(*k, *d1 as usize, *d2 as usize, *epsilon),
        RecipeKind::Lps { p, q } => lps_audits("lps", *p, *q),
        RecipeKind::EdgeIncidence { .. } => vec![planned("incidence-biregular", "incidence", AuditItem::Biregular {
            left: None,
            right: None,
        })],
        RecipeKind::Tripartite { .. } => vec![
            planned("product-biregular", "product", AuditItem::Biregular { left: None, right: None }),
            planned("product-edge-count", "product", AuditItem::EdgeCount {
                expected: edges_of("product").unwrap_or(0),
            }),
        ],
        RecipeKind::Gadget(_) => vec![planned("gadget-biregular", "gadget", AuditItem::Biregular {
            left: None,
            right: None,
        })],
        RecipeKind::Composite57 {
            p,
            q,
            d_right,
            bicycle_radius,
            ramanujan_slack,
            gadget,
            audit_max_size,
            audit_samples,
            ..
        } => {
            let d_left = (*p + 1) as usize;
            let bound = ((d_left - 1) as f64).sqrt() + ((d_right - 1) as f64).sqrt();
            let mut v = lps_audits("lps", *p, *q);
            v.push(planned("random-factor-bicycle-free", "random-factor", AuditItem::BicycleFree {
                radius: *bicycle_radius,
            }));
            v.push(planned("random-factor-spectral", "random-factor", AuditItem::Spectral {
                max_lambda2: Some(bound * (1.0 + ramanujan_slack)),
                method: Some(Method::Dense),
            }));
            v.push(planned("product-biregular", "product", AuditItem::Biregular {
                left: Some(d_left * gadget.d1),
                right: Some(d_right * gadget.d2),
            }));
            v.push(planned("product-edge-count", "product", AuditItem::EdgeCount {
                expected: edges_of("product").unwrap_or(0),
            }));
            v.extend(un_audits(*audit_max_size, *audit_samples));
            v
        }
        RecipeKind::Composite610 {
            p_a,
            p_b,
            q,
            gadget,
            audit_max_size,
            audit_samples,
        } => {
            let mut v = lps_audits("lps-a", *p_a, *q);
            v.extend(lps_audits("lps-b", *p_b, *q));
            v.push(planned("incidence-a-biregular", "incidence-a", AuditItem::Biregular {
                left: Some(2),
                right: Some((*p_a + 1) as usize),
            }));
            v.push(planned("incidence-b-biregular", "incidence-b", AuditItem::Biregular {
                left: Some((*p_b + 1) as usize),
                right: Some(2),
            }));
            v.push(planned("product-biregular", "product", AuditItem::Biregular {
                left: Some(2 * gadget.d1),
                right: Some(2 * gadget.d2),
            }));
            v.push(planned("product-edge-count", "product", AuditItem::EdgeCount {
                expected: edges_of("product").unwrap_or(0),
            }));
            v.extend(un_audits(*audit_max_size, *audit_samples));
            v
        }
    }
}

fn cd_audits(k: usize, a: usize, b: usize, epsilon: f64) -> Vec<PlannedAudit> {
    let mut v = vec![
        planned("cd-biregular", "cd", AuditItem::Biregular {
            left: Some(b),
            right: Some(a),
        }),
        planned("cd-girth", "cd", AuditItem::Girth { min: Some(k + 4) }),
    ];
    for side in [Side::Left, Side::Right] {
        let label = match side {
            Side::Left => "cd-girth-expansion-left",
            Side::Right => "cd-girth-expansion-right",
        };
        v.push(planned(label, "cd", AuditItem::GirthExpansion {
            side,
            epsilon,
            d_prime: None,
            girth: None,
        }));
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub label: String,
    pub target: String,
    pub kind: String,
    pub pass: bool,
    pub vacuous: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineSummary {
    pub recipe: Recipe,
    pub pass: bool,
    pub failed_stage: Option<String>,
    pub audits: Vec<AuditSummary>,
    /// SHA-256 of every file written before the summary.
    pub files: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub dir: PathBuf,
    pub summary: PipelineSummary,
}

/// A girth-derived size bound can be unavailable (for instance when
/// `epsilon d <= 1`); inside a pipeline that makes the audit vacuous rather
/// than a precondition failure.
fn run_planned(g: &DenseBipartiteGraph, audit: &PlannedAudit, seed: u64) -> Result<(AuditOutcome, bool), RunError> {
    match audit::run_audit(g, &audit.item, seed) {
        Ok(o) => {
            let vacuous = o.detail.get("vacuous").and_then(Value::as_bool).unwrap_or(false);
            Ok((o, vacuous))
        }
        Err(RunError::Precondition { message, .. }) if matches!(audit.item, AuditItem::GirthExpansion { .. }) => {
            Ok((
                AuditOutcome {
                    kind: audit.item.name().to_string(),
                    pass: true,
                    detail: json!({ "vacuous": true, "reason": message }),
                    elapsed_ms: 0.0,
                },
                true,
            ))
        }
        Err(e) => Err(e),
    }
}

/// Builds every stage into the bundle directory, runs the kind's audit
/// suite and writes `summary.json`. Wall times go to `timings.json`, the
/// only file that differs between identical runs.
pub fn pipeline(recipe: &Recipe, base: &Path) -> Result<PipelineOutcome, RunError> {
    let dir = base.join(&recipe.output);
    let mut sink = DirSink::new(&dir)?;
    let mut timings = BTreeMap::new();
    let started = Instant::now();
    let built = build(recipe, base, &mut sink);
    timings.insert("build".to_string(), started.elapsed().as_secs_f64() * 1e3);
    let mut summary = PipelineSummary {
        recipe: recipe.clone(),
        pass: false,
        failed_stage: None,
        audits: Vec::new(),
        files: BTreeMap::new(),
    };
    let finish = |sink: &mut DirSink, summary: &mut PipelineSummary, timings: &BTreeMap<String, f64>| {
        summary.files = sink.files.clone();
        let t = json!(timings);
        fs::write(dir.join("timings.json"), json_bytes(&t)).map_err(|e| RunError::io(&dir, e))?;
        fs::write(dir.join("summary.json"), json_bytes(summary)).map_err(|e| RunError::io(&dir, e))
    };
    if let Err(e) = built {
        summary.failed_stage = Some(match &e {
            RunError::Failed { stage, .. } => stage.clone(),
            _ => "build".into(),
        });
        finish(&mut sink, &mut summary, &timings)?;
        return Err(e);
    }
    for (i, audit) in pipeline_audits(recipe, &sink).into_iter().enumerate() {
        let g = &sink
            .artifact(&audit.target)
            .unwrap_or_else(|| panic!("pipeline audit targets unknown artifact {}", audit.target))
            .graph
            .clone();
        let start = Instant::now();
        let seed = seeds::derive(recipe.seed, &[seeds::tag("pipeline-audit"), i as u64]);
        let (outcome, vacuous) = run_planned(g, &audit, seed)?;
        timings.insert(audit.label.clone(), start.elapsed().as_secs_f64() * 1e3);
        sink.document(&format!("audits/{}", audit.label), &json!({
            "label": audit.label,
            "target": audit.target,
            "outcome": outcome,
        }))?;
        summary.audits.push(AuditSummary {
            label: audit.label.clone(),
            target: audit.target.clone(),
            kind: outcome.kind.clone(),
            pass: outcome.pass,
            vacuous,
        });
        if !outcome.pass {
            summary.failed_stage = Some(audit.label.clone());
            finish(&mut sink, &mut summary, &timings)?;
            return Err(RunError::Failed {
                stage: audit.label,
                message: "audit failed; see the bundle's audits directory".into(),
            });
        }
    }
    summary.pass = true;
    finish(&mut sink, &mut summary, &timings)?;
    Ok(PipelineOutcome { dir, summary })
}

pub fn pipeline_file(recipe_path: &Path) -> Result<PipelineOutcome, RunError> {
    pipeline(&Recipe::load(recipe_path)?, &base_dir(recipe_path))
}

/// `forge verify`: reads a graph file and an audit spec, writes the report
/// next to the graph (or where the spec says) and returns it.
pub fn verify_files(graph_path: &Path, spec_path: &Path) -> Result<(audit::VerifyReport, PathBuf), RunError> {
    let (g, _) = io::read_graph_file(graph_path).map_err(|e| RunError::precondition(graph_path.display().to_string(), e))?;
    let text = fs::read_to_string(spec_path).map_err(|e| RunError::io(spec_path, e))?;
    let spec = audit::AuditSpec::from_json(&text)?;
    let report = audit::run_audits(&g, &spec)?;
    let out = match &spec.report {
        Some(rel) => base_dir(spec_path).join(rel),
        None => {
            let mut name = graph_path.as_os_str().to_owned();
            name.push(".report.json");
            PathBuf::from(name)
        }
    };
    fs::write(&out, json_bytes(&report)).map_err(|e| RunError::io(&out, e))?;
    Ok((report, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipes_parse() {
        let r = Recipe::from_json(r#"{"kind": "cd", "k": 7, "q": 5, "a": [1, 2], "b": [1, 2, 3, 4], "seed": 3, "output": "cd.graph"}"#).unwrap();
        assert_eq!(r.seed, 3);
        assert_eq!(r.kind_name(), "cd");
        let r = Recipe::from_json(
            r#"{"kind": "composite-6.10", "p_a": 5, "p_b": 5, "q": 13,
                "gadget": {"d1": 3, "d2": 3, "C": 1.0, "delta": 0.5}, "output": "b"}"#,
        )
        .unwrap();
        assert_eq!(r.kind_name(), "composite-6.10");
        let g = Recipe::from_json(r#"{"kind": "gadget", "n1": 8, "n2": 8, "d1": 2, "d2": 2, "C": 1.0, "delta": 0.5, "output": "g"}"#).unwrap();
        assert!(matches!(g.kind, RecipeKind::Gadget(_)));
        let back: Recipe = serde_json::from_slice(&json_bytes(&g)).unwrap();
        assert_eq!(back, g);
        assert!(Recipe::from_json(r#"{"kind": "cd", "output": "x"}"#).is_err());
        assert!(Recipe::from_json(r#"{"kind": "mystery", "output": "x"}"#).is_err());
    }

    #[test]
    fn lps_bound() {
        assert_eq!(lps_girth_bound(5, 13), 8);
        assert_eq!(lps_girth_bound(5, 17), 8);
        assert_eq!(lps_girth_bound(13, 5), 4);
    }

    #[test]
    fn cd_construct_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = Recipe::from_json(r#"{"kind": "cd", "k": 7, "q": 3, "a": [1, 2], "b": [1], "output": "out/cd.graph"}"#).unwrap();
        let out = construct(&r, dir.path()).unwrap();
        let (g, m) = io::read_graph_file(&out.graph_path).unwrap();
        assert_eq!(m.as_deref(), Some("cd.graph.manifest.json"));
        assert_eq!(g.biregular_degrees(), Some((1, 2)));
        let manifest: Value = serde_json::from_slice(&fs::read(&out.manifest_path).unwrap()).unwrap();
        let again: Recipe = serde_json::from_value(manifest["recipe"].clone()).unwrap();
        assert_eq!(again, r);
        assert_eq!(manifest["checksum"], out.checksum);
    }

    #[test]
    fn invalid_params_are_preconditions() {
        let dir = tempfile::tempdir().unwrap();
        let r = Recipe::from_json(r#"{"kind": "lps", "p": 4, "q": 13, "output": "x"}"#).unwrap();
        assert_eq!(construct(&r, dir.path()).unwrap_err().exit_code(), 2);
        assert!(!dir.path().join("x").exists());
    }

    #[test]
    fn tripartite_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let k23 = DenseBipartiteGraph::from_left_adjacency(3, vec![vec![0, 1, 2]; 2]).unwrap();
        let g0 = DenseBipartiteGraph::from_edges(2, 2, &[(0, 0), (1, 1)]).unwrap();
        io::write_graph_file(&dir.path().join("g1.graph"), &k23, "-").unwrap();
        io::write_graph_file(&dir.path().join("g2.graph"), &k23.transpose(), "-").unwrap();
        io::write_graph_file(&dir.path().join("g0.graph"), &g0, "-").unwrap();
        let r = Recipe::from_json(r#"{"kind": "tripartite", "g1": "g1.graph", "g2": "g2.graph", "g0": "g0.graph", "output": "bundle"}"#).unwrap();
        let out = pipeline(&r, dir.path()).unwrap();
        assert!(out.summary.pass);
        assert!(dir.path().join("bundle/product.graph").exists());
        assert!(dir.path().join("bundle/audits/product-edge-count.json").exists());
    }
}
