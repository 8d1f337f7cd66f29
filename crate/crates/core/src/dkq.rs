//! The incidence graphs `D(k, q)`, the zero-certificate component
//! `CD(k, q)` and its unbalanced restriction `CD(k, q, A, B)`.
//!
//! Points and lines are vectors in `Z_q^k` whose coordinates follow a fixed
//! label layout: `1, (1,1), (1,2), (2,1)` followed by blocks
//! `(i,i), (i,i)', (i,i+1), (i+1,i)` for `i = 2, 3, ...`, truncated at `k`
//! entries. Labels below the first block (`(0,0)`, `(1,0)`, ...) are boundary
//! constants or aliases, all listed in [`BOUNDARY_CONSTANTS`].
//!
//! A point `p` and a line `l` are incident iff, for every `i >= 1`,
//!
//! ```text
//! l(i,i)    - p(i,i)    = l1 * p(i-1,i)
//! l(i,i)'   - p(i,i)'   = p1 * l(i,i-1)
//! l(i,i+1)  - p(i,i+1)  = p1 * l(i,i)
//! l(i+1,i)  - p(i+1,i)  = l1 * p(i,i)'
//! ```
//!
//! skipping every equation that mentions a coordinate outside the truncation.
//! Each equation determines exactly one coordinate of the unknown side from
//! coordinates that precede it in the layout, so a vertex and the first
//! coordinate of its neighbor determine the neighbor.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, Modulus, TruncPoly};
use crate::graph::{ExplicitBipartiteGraph, GraphError, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DkqError {
    #[error("k = {0} is too small (need k >= 4)")]
    DimensionTooSmall(usize),
    #[error("CD(k, q, A, B) needs odd k >= 7, got {0}")]
    InvalidComponentDimension(usize),
    #[error("selector set {0} must be a nonempty subset of 1..q-1")]
    InvalidSelectorSet(&'static str),
    #[error("certificate radius {r} out of range for k = {k} (need 1 <= r <= {max})")]
    RadiusOutOfRange { r: usize, k: usize, max: usize },
    #[error("vertex has {got} coordinates, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("vertex is not in the component")]
    NotInComponent,
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("vertex count q^{0} does not fit in 64 bits")]
    TooLarge(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl From<DkqError> for GraphError {
    fn from(e: DkqError) -> Self {
        GraphError::Oracle(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Point,
    Line,
}

impl VertexKind {
    pub fn other(self) -> VertexKind {
        match self {
            VertexKind::Point => VertexKind::Line,
            VertexKind::Line => VertexKind::Point,
        }
    }

    fn prefix(self) -> char {
        match self {
            VertexKind::Point => 'p',
            VertexKind::Line => 'l',
        }
    }

    pub fn side(self) -> Side {
        match self {
            VertexKind::Point => Side::Left,
            VertexKind::Line => Side::Right,
        }
    }

    pub fn from_side(side: Side) -> Self {
        match side {
            Side::Left => VertexKind::Point,
            Side::Right => VertexKind::Line,
        }
    }
}

/// Coordinate label. `Upper(i)` is `(i, i+1)` and `Lower(i)` is `(i+1, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    First,
    Diag(i32),
    DiagPrime(i32),
    Upper(i32),
    Lower(i32),
}

impl Label {
    /// Position in the coordinate layout, or `None` for boundary labels.
    pub fn position(self) -> Option<usize> {
        match self {
            Label::First => Some(0),
            Label::Diag(1) => Some(1),
            Label::Upper(1) => Some(2),
            Label::Lower(1) => Some(3),
            Label::Diag(i) if i >= 2 => Some(4 * i as usize - 4),
            Label::DiagPrime(i) if i >= 2 => Some(4 * i as usize - 3),
            Label::Upper(i) if i >= 2 => Some(4 * i as usize - 2),
            Label::Lower(i) if i >= 2 => Some(4 * i as usize - 1),
            _ => None,
        }
    }

    pub fn at(pos: usize) -> Label {
        match pos {
            0 => Label::First,
            1 => Label::Diag(1),
            2 => Label::Upper(1),
            3 => Label::Lower(1),
            _ => {
                let i = (pos / 4 + 1) as i32;
                match pos % 4 {
                    0 => Label::Diag(i),
                    1 => Label::DiagPrime(i),
                    2 => Label::Upper(i),
                    _ => Label::Lower(i),
                }
            }
        }
    }

    pub fn name(self, kind: VertexKind) -> String {
        let c = kind.prefix();
        match self {
            Label::First => format!("{c}1"),
            Label::Diag(i) => format!("{c}{i},{i}"),
            Label::DiagPrime(i) => format!("{c}'{i},{i}"),
            Label::Upper(i) => format!("{c}{i},{}", i + 1),
            Label::Lower(i) => format!("{c}{},{i}", i + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Value(i64),
    Alias(Label),
}

/// Values of the labels that sit outside the stored coordinates. Both the
/// incidence solver and the certificate evaluator resolve labels through this
/// table.
pub const BOUNDARY_CONSTANTS: &[(VertexKind, Label, Boundary)] = &[
    (VertexKind::Point, Label::Upper(-1), Boundary::Value(0)),
    (VertexKind::Point, Label::Lower(-1), Boundary::Value(0)),
    (VertexKind::Point, Label::Lower(0), Boundary::Value(0)),
    (VertexKind::Point, Label::Upper(0), Boundary::Alias(Label::First)),
    (VertexKind::Point, Label::Diag(0), Boundary::Value(-1)),
    (VertexKind::Point, Label::DiagPrime(0), Boundary::Value(1)),
    (VertexKind::Point, Label::DiagPrime(1), Boundary::Alias(Label::Diag(1))),
    (VertexKind::Line, Label::Upper(-1), Boundary::Value(0)),
    (VertexKind::Line, Label::Lower(-1), Boundary::Value(0)),
    (VertexKind::Line, Label::Upper(0), Boundary::Value(0)),
    (VertexKind::Line, Label::Lower(0), Boundary::Alias(Label::First)),
    (VertexKind::Line, Label::Diag(0), Boundary::Value(-1)),
    (VertexKind::Line, Label::DiagPrime(0), Boundary::Value(1)),
    (VertexKind::Line, Label::DiagPrime(1), Boundary::Alias(Label::Diag(1))),
];

fn boundary(kind: VertexKind, label: Label) -> Option<Boundary> {
    BOUNDARY_CONSTANTS
        .iter()
        .find(|(k, l, _)| *k == kind && *l == label)
        .map(|&(_, _, b)| b)
}

/// Ordered coordinate labels for dimension `k`.
pub fn coordinate_schema(k: usize) -> Result<Vec<Label>, DkqError> {
    if k < 4 {
        return Err(DkqError::DimensionTooSmall(k));
    }
    Ok((0..k).map(Label::at).collect())
}

/// Resolves `label` on a coordinate vector of the given kind.
fn resolve(kind: VertexKind, coords: &[u64], label: Label, q: Modulus) -> Option<u64> {
    if let Some(pos) = label.position() {
        return coords.get(pos).copied();
    }
    match boundary(kind, label)? {
        Boundary::Value(v) => Some(q.elem_signed(v).value()),
        Boundary::Alias(l) => resolve(kind, coords, l, q),
    }
}

/// One incidence equation: `line[target] - point[target] = first(a) * b`.
#[derive(Clone, Copy, Debug)]
struct Equation {
    /// Which side supplies the first-coordinate factor.
    first_from: VertexKind,
    factor: (VertexKind, Label),
}

fn equation_for(target: Label) -> Equation {
    use VertexKind::*;
    match target {
        Label::Diag(i) => Equation {
            first_from: Line,
            factor: (Point, Label::Upper(i - 1)),
        },
        Label::DiagPrime(i) => Equation {
            first_from: Point,
            factor: (Line, Label::Lower(i - 1)),
        },
        Label::Upper(i) => Equation {
            first_from: Point,
            factor: (Line, Label::Diag(i)),
        },
        Label::Lower(i) => Equation {
            first_from: Line,
            factor: (Point, Label::DiagPrime(i)),
        },
        Label::First => unreachable!("first coordinate is free"),
    }
}

/// A point or line of `D(k, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DkqVertex {
    kind: VertexKind,
    modulus: Modulus,
    coords: Vec<u64>,
}

impl DkqVertex {
    pub fn new(kind: VertexKind, modulus: Modulus, coords: Vec<u64>) -> Result<Self, DkqError> {
        if coords.len() < 4 {
            return Err(DkqError::DimensionTooSmall(coords.len()));
        }
        let coords = coords.into_iter().map(|c| c % modulus.get()).collect();
        Ok(DkqVertex {
            kind,
            modulus,
            coords,
        })
    }

    pub fn zero(kind: VertexKind, modulus: Modulus, k: usize) -> Self {
        DkqVertex {
            kind,
            modulus,
            coords: vec![0; k],
        }
    }

    pub fn kind(&self) -> VertexKind {
        self.kind
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn first(&self) -> u64 {
        self.coords[0]
    }

    /// Value of a label, including boundary labels.
    pub fn get(&self, label: Label) -> Option<u64> {
        resolve(self.kind, &self.coords, label, self.modulus)
    }
}

impl fmt::Display for DkqVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            VertexKind::Point => "P",
            VertexKind::Line => "L",
        };
        write!(f, "{kind}{:?}", self.coords)
    }
}

/// The unique vertex of the opposite kind incident to `u` whose first
/// coordinate is `t`.
pub fn dkq_neighbor(u: &DkqVertex, t: u64) -> DkqVertex {
    let q = u.modulus;
    let k = u.coords.len();
    let other = u.kind.other();
    let mut out = vec![0u64; k];
    out[0] = t % q.get();
    for pos in 1..k {
        let eq = equation_for(Label::at(pos));
        // Everything the equation references precedes `pos` in the layout.
        let lookup = |kind: VertexKind, label: Label| {
            if kind == u.kind {
                resolve(kind, &u.coords, label, q)
            } else {
                resolve(kind, &out, label, q)
            }
            .expect("referenced label precedes target")
        };
        let first = lookup(eq.first_from, Label::First);
        let rhs = q.mul(first, lookup(eq.factor.0, eq.factor.1));
        out[pos] = match other {
            VertexKind::Line => q.add(u.coords[pos], rhs),
            VertexKind::Point => q.sub(u.coords[pos], rhs),
        };
    }
    DkqVertex {
        kind: other,
        modulus: q,
        coords: out,
    }
}

/// Checks every incidence equation whose labels are all defined. Independent
/// of the solver in [`dkq_neighbor`].
pub fn is_incident(p: &DkqVertex, l: &DkqVertex) -> bool {
    assert_eq!(p.kind, VertexKind::Point);
    assert_eq!(l.kind, VertexKind::Line);
    if p.coords.len() != l.coords.len() || p.modulus != l.modulus {
        return false;
    }
    let q = p.modulus;
    let k = p.coords.len() as i32;
    for i in 1..=k {
        for target in [
            Label::Diag(i),
            Label::DiagPrime(i),
            Label::Upper(i),
            Label::Lower(i),
        ] {
            let eq = equation_for(target);
            let pick = |kind: VertexKind, label: Label| match kind {
                VertexKind::Point => p.get(label),
                VertexKind::Line => l.get(label),
            };
            let (Some(lt), Some(pt), Some(first), Some(f)) = (
                l.get(target),
                p.get(target),
                pick(eq.first_from, Label::First),
                pick(eq.factor.0, eq.factor.1),
            ) else {
                continue;
            };
            if q.sub(lt, pt) != q.mul(first, f) {
                return false;
            }
        }
    }
    true
}

/// The r-certificate `(b_2, ..., b_r)` where
/// `b_t = sum_{i=0}^{t} u(i,i) u(t-i,t-i)' - u(i,i+1) u(t-i,t-i-1)`,
/// i.e. the coefficients of `x^2..x^r` in `A_u B_u - C_u D_u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub r: usize,
    pub entries: Vec<u64>,
}

impl Certificate {
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }
}

/// Largest certificate radius for dimension `k`: `floor((k + 2) / 4)`.
pub fn certificate_radius(k: usize) -> usize {
    (k + 2) / 4
}

pub fn certificate(u: &DkqVertex, r: usize) -> Result<Certificate, DkqError> {
    let k = u.dim();
    let max = certificate_radius(k);
    // Every label up to (r, r+1) must be stored.
    let fits = Label::Upper(r as i32).position().is_some_and(|p| p < k) || r <= 1;
    if r == 0 || r > max || !fits {
        return Err(DkqError::RadiusOutOfRange { r, k, max });
    }
    let q = u.modulus;
    let get = |label: Label| u.get(label).expect("certificate label in range");
    let mut entries = Vec::with_capacity(r.saturating_sub(1));
    for t in 2..=r as i32 {
        let mut acc = 0;
        for i in 0..=t {
            let j = t - i;
            acc = q.add(acc, q.mul(get(Label::Diag(i)), get(Label::DiagPrime(j))));
            acc = q.sub(acc, q.mul(get(Label::Upper(i)), get(Label::Lower(j - 1))));
        }
        entries.push(acc);
    }
    Ok(Certificate { r, entries })
}

fn checked_pow(q: u64, e: usize) -> Result<u64, DkqError> {
    q.checked_pow(e as u32).ok_or(DkqError::TooLarge(e))
}

/// The full incidence graph `D(k, q)`: points on the left, lines on the
/// right, both indexed by their coordinate vector read as a base-`q` number
/// (first coordinate most significant). Slot `t` at any vertex leads to the
/// neighbor whose first coordinate is `t`.
#[derive(Clone, Debug)]
pub struct Dkq {
    k: usize,
    q: Modulus,
    size: u64,
}

impl Dkq {
    pub fn new(k: usize, q: u64) -> Result<Self, DkqError> {
        if k < 4 {
            return Err(DkqError::DimensionTooSmall(k));
        }
        let q = Modulus::new(q)?;
        let size = checked_pow(q.get(), k)?;
        Ok(Dkq { k, q, size })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    pub fn side_size(&self) -> u64 {
        self.size
    }

    pub fn vertex(&self, kind: VertexKind, index: u64) -> Result<DkqVertex, DkqError> {
        if index >= self.size {
            return Err(DkqError::IndexOutOfRange {
                index,
                size: self.size,
            });
        }
        let q = self.q.get();
        let mut coords = vec![0; self.k];
        let mut rest = index;
        for c in coords.iter_mut().rev() {
            *c = rest % q;
            rest /= q;
        }
        Ok(DkqVertex {
            kind,
            modulus: self.q,
            coords,
        })
    }

    pub fn index(&self, v: &DkqVertex) -> Result<u64, DkqError> {
        if v.dim() != self.k {
            return Err(DkqError::WrongLength {
                expected: self.k,
                got: v.dim(),
            });
        }
        let q = self.q.get();
        Ok(v.coords.iter().fold(0, |acc, &c| acc * q + c))
    }
}

impl ExplicitBipartiteGraph for Dkq {
    fn n_left(&self) -> usize {
        self.size as usize
    }

    fn n_right(&self) -> usize {
        self.size as usize
    }

    fn degree(&self, _side: Side, _vertex: usize) -> usize {
        self.q.get() as usize
    }

    fn neighbor(&self, side: Side, vertex: usize, slot: usize) -> Result<(usize, usize), GraphError> {
        let q = self.q.get() as usize;
        if slot >= q {
            return Err(GraphError::SlotOutOfRange {
                vertex,
                slot,
                degree: q,
            });
        }
        let u = self.vertex(VertexKind::from_side(side), vertex as u64)?;
        let v = dkq_neighbor(&u, slot as u64);
        Ok((self.index(&v)? as usize, u.first() as usize))
    }
}

/// Parameters of `CD(k, q, A, B)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdParams {
    pub k: usize,
    pub q: Modulus,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub r: usize,
}

impl CdParams {
    pub fn new(k: usize, q: u64, a: &[u64], b: &[u64]) -> Result<Self, DkqError> {
        if k < 7 || k.is_multiple_of(2) {
            return Err(DkqError::InvalidComponentDimension(k));
        }
        let q = Modulus::new(q)?;
        let clean = |set: &[u64], name: &'static str| {
            let mut s = set.to_vec();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&x| x == 0 || x >= q.get()) {
                return Err(DkqError::InvalidSelectorSet(name));
            }
            Ok(s)
        };
        Ok(CdParams {
            k,
            q,
            a: clean(a, "A")?,
            b: clean(b, "B")?,
            r: certificate_radius(k),
        })
    }

    pub fn selector_set(&self, kind: VertexKind) -> &[u64] {
        match kind {
            VertexKind::Point => &self.a,
            VertexKind::Line => &self.b,
        }
    }

    /// The closed-form side size `|A| q^(k+1-r)` (resp. `|B|`).
    pub fn closed_form_count(&self, kind: VertexKind) -> u128 {
        self.selector_set(kind).len() as u128 * (self.q.get() as u128).pow((self.k + 1 - self.r) as u32)
    }
}

/// How the coordinates of one side of `CD(k, q, A, B)` are laid out for the
/// index bijection.
#[derive(Clone, Debug)]
struct SideLayout {
    /// Free polynomial coefficients, most significant digit first.
    free_poly: Vec<Label>,
    /// Coefficients solved from the zero-certificate condition.
    solved: Vec<Label>,
    /// Schema positions unrelated to the four polynomials.
    free_coords: Vec<usize>,
    /// Number of vertices per selector value.
    per_selector: u64,
}

impl SideLayout {
    fn new(kind: VertexKind, k: usize, r: i32, q: u64) -> Result<Self, DkqError> {
        let diag = (1..=r).map(Label::Diag);
        let diag_prime = (2..=r).map(Label::DiagPrime);
        let (free_poly, solved): (Vec<Label>, Vec<Label>) = match kind {
            // c_0 = p1 is invertible, D is solved: d_2..d_r.
            VertexKind::Point => (
                diag.chain(diag_prime).chain((1..=r).map(Label::Upper)).collect(),
                (1..r).map(Label::Lower).collect(),
            ),
            // d_1 = l1 is invertible and c_0 = 0, so c_1..c_{r-1} are solved
            // and c_r stays free.
            VertexKind::Line => (
                diag.chain(diag_prime)
                    .chain((1..r).map(Label::Lower))
                    .chain(std::iter::once(Label::Upper(r)))
                    .collect(),
                (1..r).map(Label::Upper).collect(),
            ),
        };
        let mut used = vec![false; k];
        used[0] = true;
        for l in free_poly.iter().chain(&solved) {
            used[l.position().expect("polynomial label is stored")] = true;
        }
        let free_coords: Vec<usize> = (0..k).filter(|&p| !used[p]).collect();
        let per_selector = checked_pow(q, free_poly.len() + free_coords.len())?;
        Ok(SideLayout {
            free_poly,
            solved,
            free_coords,
            per_selector,
        })
    }

    fn digit_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.free_poly
            .iter()
            .map(|l| l.position().unwrap())
            .chain(self.free_coords.iter().copied())
    }
}

/// `CD(k, q, A, B)` with the index bijections `f_U`, `f_V` and a neighbor
/// oracle that never materializes the graph.
#[derive(Clone, Debug)]
pub struct CdGraph {
    params: CdParams,
    point_layout: SideLayout,
    line_layout: SideLayout,
}

/// Construction summary for manifests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdManifest {
    pub k: usize,
    pub q: u64,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub r: usize,
    pub r_alternative: usize,
    pub left_count: u64,
    pub right_count: u64,
    pub left_closed_form: u128,
    pub right_closed_form: u128,
    pub closed_form_agrees: bool,
}

impl CdGraph {
    pub fn new(params: CdParams) -> Result<Self, DkqError> {
        let (k, r, q) = (params.k, params.r as i32, params.q.get());
        Ok(CdGraph {
            point_layout: SideLayout::new(VertexKind::Point, k, r, q)?,
            line_layout: SideLayout::new(VertexKind::Line, k, r, q)?,
            params,
        })
    }

    pub fn params(&self) -> &CdParams {
        &self.params
    }

    fn layout(&self, kind: VertexKind) -> &SideLayout {
        match kind {
            VertexKind::Point => &self.point_layout,
            VertexKind::Line => &self.line_layout,
        }
    }

    /// Side size from the bijection: selectors times free assignments.
    pub fn vertex_count(&self, kind: VertexKind) -> u64 {
        self.params.selector_set(kind).len() as u64 * self.layout(kind).per_selector
    }

    pub fn manifest(&self) -> CdManifest {
        let left = self.vertex_count(VertexKind::Point);
        let right = self.vertex_count(VertexKind::Line);
        let lc = self.params.closed_form_count(VertexKind::Point);
        let rc = self.params.closed_form_count(VertexKind::Line);
        CdManifest {
            k: self.params.k,
            q: self.params.q.get(),
            a: self.params.a.clone(),
            b: self.params.b.clone(),
            r: self.params.r,
            r_alternative: (self.params.k + 4) / 4,
            left_count: left,
            right_count: right,
            left_closed_form: lc,
            right_closed_form: rc,
            closed_form_agrees: left as u128 == lc && right as u128 == rc,
        }
    }

    /// Values of the solved coefficients given the selector and free
    /// polynomial coefficients already written into `coords`.
    fn solve(&self, kind: VertexKind, coords: &[u64]) -> Result<Vec<u64>, DkqError> {
        let q = self.params.q;
        let r = self.params.r;
        let get = |label: Label| resolve(kind, coords, label, q).unwrap_or(0);
        let poly = |f: &dyn Fn(i32) -> Label, deg: usize| -> Result<TruncPoly, DkqError> {
            let vals: Vec<u64> = (0..=deg as i32).map(|i| get(f(i))).collect();
            Ok(TruncPoly::from_values(q, deg, &vals)?)
        };
        let a = poly(&Label::Diag, r)?;
        let b = poly(&Label::DiagPrime, r)?;
        let ab1 = a.mul(&b)?.add(&TruncPoly::one(q, r))?;
        debug_assert_eq!(&ab1.values()[..2], &[0, 0]);
        match kind {
            VertexKind::Point => {
                // D = (AB + 1) C^{-1}
                let c = poly(&Label::Upper, r)?;
                let d = ab1.mul(&c.inverse()?)?;
                Ok(d.values()[2..].to_vec())
            }
            VertexKind::Line => {
                // CD = AB + 1 with C = x C', D = x D':  C' = ((AB+1)/x^2) D'^{-1} mod x^(r-1)
                let deg = r - 2;
                let shifted = TruncPoly::from_values(q, deg, &ab1.values()[2..])?;
                let d_vals: Vec<u64> = (1..=r - 1).map(|i| get(Label::Lower(i as i32 - 1))).collect();
                let d_shift = TruncPoly::from_values(q, deg, &d_vals)?;
                let c_shift = shifted.mul(&d_shift.inverse()?)?;
                Ok(c_shift.values().to_vec())
            }
        }
    }

    /// `f_U` (points) or `f_V` (lines).
    pub fn index_to_vertex(&self, kind: VertexKind, index: u64) -> Result<DkqVertex, DkqError> {
        let size = self.vertex_count(kind);
        if index >= size {
            return Err(DkqError::IndexOutOfRange { index, size });
        }
        let layout = self.layout(kind);
        let q = self.params.q.get();
        let mut coords = vec![0u64; self.params.k];
        coords[0] = self.params.selector_set(kind)[(index / layout.per_selector) as usize];
        let mut rest = index % layout.per_selector;
        let digits: Vec<usize> = layout.digit_positions().collect();
        for &pos in digits.iter().rev() {
            coords[pos] = rest % q;
            rest /= q;
        }
        let solved = self.solve(kind, &coords)?;
        for (label, v) in layout.solved.iter().zip(solved) {
            coords[label.position().unwrap()] = v;
        }
        Ok(DkqVertex {
            kind,
            modulus: self.params.q,
            coords,
        })
    }

    /// `f_U^{-1}` / `f_V^{-1}`.
    pub fn vertex_to_index(&self, v: &DkqVertex) -> Result<u64, DkqError> {
        if v.dim() != self.params.k {
            return Err(DkqError::WrongLength {
                expected: self.params.k,
                got: v.dim(),
            });
        }
        if v.modulus != self.params.q {
            return Err(FieldError::ModulusMismatch(v.modulus.get(), self.params.q.get()).into());
        }
        let kind = v.kind;
        let layout = self.layout(kind);
        let sel = self
            .params
            .selector_set(kind)
            .binary_search(&v.first())
            .map_err(|_| DkqError::NotInComponent)?;
        let solved = self.solve(kind, &v.coords)?;
        for (label, s) in layout.solved.iter().zip(solved) {
            if v.coords[label.position().unwrap()] != s {
                return Err(DkqError::NotInComponent);
            }
        }
        let q = self.params.q.get();
        let rest = layout
            .digit_positions()
            .fold(0u64, |acc, pos| acc * q + v.coords[pos]);
        Ok(sel as u64 * layout.per_selector + rest)
    }

    /// Index of the `j`-th neighbor of vertex `i` of the given kind: decode,
    /// step to the neighbor whose first coordinate is the `j`-th selector of
    /// the other side, encode.
    pub fn neighbor_index(&self, kind: VertexKind, i: u64, j: usize) -> Result<u64, DkqError> {
        let others = self.params.selector_set(kind.other());
        let &t = others.get(j).ok_or(DkqError::IndexOutOfRange {
            index: j as u64,
            size: others.len() as u64,
        })?;
        let u = self.index_to_vertex(kind, i)?;
        self.vertex_to_index(&dkq_neighbor(&u, t))
    }
}

impl ExplicitBipartiteGraph for CdGraph {
    fn n_left(&self) -> usize {
        self.vertex_count(VertexKind::Point) as usize
    }

    fn n_right(&self) -> usize {
        self.vertex_count(VertexKind::Line) as usize
    }

    fn degree(&self, side: Side, _vertex: usize) -> usize {
        self.params
            .selector_set(VertexKind::from_side(side).other())
            .len()
    }

    fn neighbor(&self, side: Side, vertex: usize, slot: usize) -> Result<(usize, usize), GraphError> {
        let kind = VertexKind::from_side(side);
        let others = self.params.selector_set(kind.other());
        if slot >= others.len() {
            return Err(GraphError::SlotOutOfRange {
                vertex,
                slot,
                degree: others.len(),
            });
        }
        let u = self.index_to_vertex(kind, vertex as u64)?;
        let v = dkq_neighbor(&u, others[slot]);
        let idx = self.vertex_to_index(&v)?;
        let co = self
            .params
            .selector_set(kind)
            .binary_search(&u.first())
            .expect("decoded vertex has a valid selector");
        Ok((idx as usize, co))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::count_field_ops;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(k: usize) -> Vec<String> {
        coordinate_schema(k)
            .unwrap()
            .into_iter()
            .map(|l| l.name(VertexKind::Point))
            .collect()
    }

    #[test]
    fn schema_layout() {
        assert_eq!(names(4), ["p1", "p1,1", "p1,2", "p2,1"]);
        assert_eq!(
            names(7),
            ["p1", "p1,1", "p1,2", "p2,1", "p2,2", "p'2,2", "p2,3"]
        );
        assert_eq!(names(12)[8..], ["p3,3", "p'3,3", "p3,4", "p4,3"]);
        assert!(coordinate_schema(3).is_err());
        for pos in 0..40 {
            assert_eq!(Label::at(pos).position(), Some(pos));
        }
    }

    #[test]
    fn zero_point_has_zero_neighbor() {
        let q = Modulus::new(5).unwrap();
        let zero = DkqVertex::zero(VertexKind::Point, q, 7);
        let v = dkq_neighbor(&zero, 0);
        assert_eq!(v, DkqVertex::zero(VertexKind::Line, q, 7));
    }

    #[test]
    fn neighbor_is_incident_and_symmetric() {
        let g = Dkq::new(9, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let kind = if rng.gen() { VertexKind::Point } else { VertexKind::Line };
            let u = g.vertex(kind, rng.gen_range(0..g.side_size())).unwrap();
            let t = rng.gen_range(0..7);
            let v = dkq_neighbor(&u, t);
            assert_eq!(v.first(), t);
            let (p, l) = match kind {
                VertexKind::Point => (&u, &v),
                VertexKind::Line => (&v, &u),
            };
            assert!(is_incident(p, l));
            let back = dkq_neighbor(&v, u.first());
            assert_eq!(back, u);
        }
    }

    /// Hand-expanded `b_2` for k = 7.
    fn b2_direct(u: &DkqVertex) -> u64 {
        let q = u.modulus().get() as i64;
        let c: Vec<i64> = u.coords().iter().map(|&x| x as i64).collect();
        let (u1, u11, u12, u21, u22, u22p) = (c[0], c[1], c[2], c[3], c[4], c[5]);
        let v = match u.kind() {
            // -p'22 - p1 p21 + p11^2 + p22
            VertexKind::Point => -u22p - u1 * u21 + u11 * u11 + u22,
            // -l'22 + l11^2 - l12 l1 + l22
            VertexKind::Line => -u22p + u11 * u11 - u12 * u1 + u22,
        };
        v.rem_euclid(q) as u64
    }

    #[test]
    fn certificate_matches_direct_sum() {
        let g = Dkq::new(7, 3).unwrap();
        for kind in [VertexKind::Point, VertexKind::Line] {
            for i in 0..g.side_size() {
                let u = g.vertex(kind, i).unwrap();
                assert_eq!(certificate(&u, 2).unwrap().entries, vec![b2_direct(&u)]);
            }
        }
        let zero = DkqVertex::zero(VertexKind::Point, Modulus::new(3).unwrap(), 7);
        assert!(certificate(&zero, 2).unwrap().is_zero());
    }

    #[test]
    fn certificate_radius_bounds() {
        let zero = DkqVertex::zero(VertexKind::Point, Modulus::new(3).unwrap(), 7);
        assert!(matches!(
            certificate(&zero, 3),
            Err(DkqError::RadiusOutOfRange { .. })
        ));
        assert!(certificate(&zero, 0).is_err());
        let z5 = DkqVertex::zero(VertexKind::Point, Modulus::new(3).unwrap(), 5);
        assert!(certificate(&z5, 1).unwrap().entries.is_empty());
    }

    #[test]
    fn certificate_edge_invariant_k11() {
        let g = Dkq::new(11, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let u = g.vertex(VertexKind::Point, rng.gen_range(0..g.side_size())).unwrap();
            let v = dkq_neighbor(&u, rng.gen_range(0..5));
            assert_eq!(certificate(&u, 3).unwrap(), certificate(&v, 3).unwrap());
        }
    }

    #[test]
    fn cd_params_validation() {
        assert!(CdParams::new(7, 3, &[], &[1]).is_err());
        assert!(CdParams::new(7, 3, &[0], &[1]).is_err());
        assert!(CdParams::new(7, 3, &[3], &[1]).is_err());
        assert!(CdParams::new(8, 3, &[1], &[1]).is_err());
        assert!(CdParams::new(5, 3, &[1], &[1]).is_err());
        assert!(CdParams::new(7, 4, &[1], &[1]).is_err());
        let p = CdParams::new(7, 3, &[2, 1, 2], &[1]).unwrap();
        assert_eq!(p.a, vec![1, 2]);
        assert_eq!(p.r, 2);
    }

    #[test]
    fn first_index_is_member() {
        let cd = CdGraph::new(CdParams::new(7, 3, &[1, 2], &[1, 2]).unwrap()).unwrap();
        for kind in [VertexKind::Point, VertexKind::Line] {
            let v = cd.index_to_vertex(kind, 0).unwrap();
            assert!(certificate(&v, 2).unwrap().is_zero());
            assert_eq!(cd.vertex_to_index(&v).unwrap(), 0);
        }
        let v = cd.index_to_vertex(VertexKind::Point, 0).unwrap();
        assert_eq!(v.first(), 1);
    }

    #[test]
    fn non_member_rejected() {
        let cd = CdGraph::new(CdParams::new(7, 3, &[1], &[1, 2]).unwrap()).unwrap();
        let q = Modulus::new(3).unwrap();
        // first coordinate outside A
        let v = DkqVertex::new(VertexKind::Point, q, vec![2, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(cd.vertex_to_index(&v), Err(DkqError::NotInComponent));
        // nonzero certificate: b2 = p22 = 1
        let v = DkqVertex::new(VertexKind::Point, q, vec![1, 0, 0, 0, 1, 0, 0]).unwrap();
        assert_eq!(cd.vertex_to_index(&v), Err(DkqError::NotInComponent));
        assert!(cd.index_to_vertex(VertexKind::Point, cd.vertex_count(VertexKind::Point)).is_err());
    }

    #[test]
    fn neighbor_oracle_is_local() {
        let cd = CdGraph::new(CdParams::new(11, 5, &[1, 2], &[1, 2, 3, 4]).unwrap()).unwrap();
        let n = cd.vertex_count(VertexKind::Point);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..4);
            let (res, ops) = count_field_ops(|| cd.neighbor_index(VertexKind::Point, i, j));
            let w = res.unwrap();
            assert!(ops <= 50 * 11 * 11, "{ops} field ops");
            // walking back along the same edge returns to i
            let slot = cd.params().a.binary_search(&cd.index_to_vertex(VertexKind::Point, i).unwrap().first()).unwrap();
            assert_eq!(cd.neighbor_index(VertexKind::Line, w, slot).unwrap(), i);
        }
    }
}
