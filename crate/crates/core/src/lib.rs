//! Explicit unique-neighbor expander constructions and the checks that
//! certify them at desk scale.
//!
//! * [`field`]: prime fields and truncated polynomial rings.
//! * [`dkq`]: the incidence graphs `D(k, q)` and their components.
//! * [`lps`]: LPS Ramanujan graphs over `PGL(2, q)`.
//! * [`transforms`]: edge-vertex incidence graphs and tripartite products.
//! * [`gadget`]: random biregular gadgets and their expansion certificates.
//! * [`verify`]: girth, bicycle-freeness, expansion, spectra and density checks.
//! * [`io`]: the plain-text graph file format.
//! * [`recipe`]: recipes, manifests and the construct / pipeline drivers.
//! * [`audit`]: audit specs for `forge verify`.

pub mod audit;
pub mod dkq;
pub mod field;
pub mod gadget;
pub mod graph;
pub mod io;
pub mod lps;
pub mod par;
pub mod recipe;
pub mod seeds;
pub mod transforms;
pub mod verify;

pub use field::{FieldElem, FieldError, Modulus, TruncPoly};
pub use graph::{DenseBipartiteGraph, ExplicitBipartiteGraph, Graph, GraphError, Side};
