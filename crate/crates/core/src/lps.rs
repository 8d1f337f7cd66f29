//! LPS Ramanujan graphs: the bipartite Cayley graph of `PGL(2, q)` with
//! respect to the `p + 1` quaternion generators of norm `p`. The left side is
//! `PSL(2, q)` (classes with square determinant), the right side its coset.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{is_prime, mul_mod, pow_mod};
use crate::graph::{ExplicitBipartiteGraph, GraphError, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpsError {
    #[error("{name} = {value} is not prime")]
    NotPrime { name: &'static str, value: u64 },
    #[error("{name} = {value} is not 1 mod 4")]
    NotOneModFour { name: &'static str, value: u64 },
    #[error("q = {q} is a quadratic residue mod p = {p}")]
    QuadraticResidue { p: u64, q: u64 },
    #[error("q = {q} must exceed 2 sqrt(p) for p = {p}")]
    QTooSmall { p: u64, q: u64 },
    #[error("q = {0} is too large for an explicit vertex table")]
    QTooLarge(u64),
    #[error("found {found} generators, expected {expected}")]
    GeneratorCount { found: usize, expected: usize },
}

/// Legendre symbol `(a | p)` for odd prime `p`, as -1, 0 or 1.
pub fn legendre(a: u64, p: u64) -> i32 {
    match pow_mod(a % p, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .expect("every prime has a primitive root")
}

fn check_p(p: u64) -> Result<(), LpsError> {
    if !is_prime(p) {
        return Err(LpsError::NotPrime { name: "p", value: p });
    }
    if p % 4 != 1 {
        return Err(LpsError::NotOneModFour { name: "p", value: p });
    }
    Ok(())
}

/// Smallest prime `q >= min_q` with `q = p + (3p + 1) g (mod 4p)`, where `g`
/// is the smallest primitive root mod `p`. Such `q` is 1 mod 4 and a
/// non-residue mod `p`; both are re-checked.
pub fn find_lps_q(p: u64, min_q: u64) -> Result<u64, LpsError> {
    check_p(p)?;
    let g = primitive_root(p);
    let m = 4 * p;
    let class = (p + (3 * p + 1) * g) % m;
    let mut q = if min_q <= class {
        class
    } else {
        min_q + (class + m - min_q % m) % m
    };
    loop {
        if is_prime(q) && q != p {
            debug_assert_eq!(q % 4, 1);
            if q % 4 == 1 && legendre(q, p) == -1 {
                return Ok(q);
            }
        }
        q += m;
    }
}

/// A 2x2 matrix over `Z_q`, entries `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mat2(pub [u64; 4]);

impl Mat2 {
    pub fn mul(&self, other: &Mat2, q: u64) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = other.0;
        Mat2([
            (mul_mod(a, e, q) + mul_mod(b, g, q)) % q,
            (mul_mod(a, f, q) + mul_mod(b, h, q)) % q,
            (mul_mod(c, e, q) + mul_mod(d, g, q)) % q,
            (mul_mod(c, f, q) + mul_mod(d, h, q)) % q,
        ])
    }

    pub fn det(&self, q: u64) -> u64 {
        let [a, b, c, d] = self.0;
        (mul_mod(a, d, q) + q - mul_mod(b, c, q)) % q
    }

    pub fn scale(&self, s: u64, q: u64) -> Mat2 {
        Mat2(self.0.map(|x| mul_mod(x, s, q)))
    }

    /// Representative whose first nonzero entry is 1.
    pub fn canonical(&self, q: u64) -> Mat2 {
        let lead = self.0.iter().copied().find(|&x| x != 0).expect("nonzero matrix");
        self.scale(pow_mod(lead, q - 2, q), q)
    }

    fn key(&self, q: u64) -> u64 {
        self.0.iter().fold(0, |acc, &x| acc * q + x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpsParams {
    pub p: u64,
    pub q: u64,
}

impl LpsParams {
    pub fn new(p: u64, q: u64) -> Result<Self, LpsError> {
        check_p(p)?;
        if !is_prime(q) {
            return Err(LpsError::NotPrime { name: "q", value: q });
        }
        if q % 4 != 1 {
            return Err(LpsError::NotOneModFour { name: "q", value: q });
        }
        if legendre(q, p) != -1 {
            return Err(LpsError::QuadraticResidue { p, q });
        }
        if (q * q) <= 4 * p {
            return Err(LpsError::QTooSmall { p, q });
        }
        if q > 200 {
            return Err(LpsError::QTooLarge(q));
        }
        Ok(LpsParams { p, q })
    }
}

/// Square root of -1 mod `q` and the non-residue it came from.
pub fn sqrt_minus_one(q: u64) -> (u64, u64) {
    let c = (2..q).find(|&c| legendre(c, q) == -1).expect("odd prime has a non-residue");
    (pow_mod(c, (q - 1) / 4, q), c)
}

/// Integer solutions of `a^2 + b^2 + c^2 + d^2 = p` with `a > 0` odd and
/// `b, c, d` even, in lexicographic order.
pub fn four_square_solutions(p: u64) -> Vec<[i64; 4]> {
    let p = p as i64;
    let m = (p as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in (1..=m).step_by(2) {
        for b in (-m..=m).filter(|x| x % 2 == 0) {
            for c in (-m..=m).filter(|x| x % 2 == 0) {
                for d in (-m..=m).filter(|x| x % 2 == 0) {
                    if a * a + b * b + c * c + d * d == p {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// The `p + 1` generators `[[a + ib, c + id], [-c + id, a - ib]]`, canonical.
pub fn lps_generators(params: &LpsParams) -> Result<Vec<Mat2>, LpsError> {
    let (p, q) = (params.p, params.q);
    let (i, _) = sqrt_minus_one(q);
    let m = |x: i64| x.rem_euclid(q as i64) as u64;
    let gens: Vec<Mat2> = four_square_solutions(p)
        .into_iter()
        .map(|[a, b, c, d]| {
            let (a, b, c, d) = (m(a), m(b), m(c), m(d));
            let ib = mul_mod(i, b, q);
            let id = mul_mod(i, d, q);
            Mat2([
                (a + ib) % q,
                (c + id) % q,
                (q - c + id) % q,
                (a + q - ib) % q,
            ])
            .canonical(q)
        })
        .collect();
    if gens.len() != p as usize + 1 {
        return Err(LpsError::GeneratorCount {
            found: gens.len(),
            expected: p as usize + 1,
        });
    }
    Ok(gens)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpsManifest {
    pub p: u64,
    pub q: u64,
    pub side_size: usize,
    pub sqrt_minus_one: u64,
    pub nonresidue_base: u64,
    pub generators: Vec<[u64; 4]>,
}

/// `LPS(p, q)` as a `(p+1, p+1)`-biregular oracle graph.
#[derive(Clone, Debug)]
pub struct LpsGraph {
    params: LpsParams,
    generators: Vec<Mat2>,
    inverse_slot: Vec<usize>,
    sides: [Vec<Mat2>; 2],
    index: HashMap<u64, usize>,
}

fn side_idx(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl LpsGraph {
    pub fn new(params: LpsParams) -> Result<Self, LpsError> {
        let q = params.q;
        let generators = lps_generators(&params)?;
        let identity = Mat2([1, 0, 0, 1]);
        let inverse_slot = generators
            .iter()
            .map(|g| {
                generators
                    .iter()
                    .position(|h| h.mul(g, q).canonical(q) == identity)
                    .expect("generator set is closed under inverses")
            })
            .collect();
        let mut sides = [Vec::new(), Vec::new()];
        let mut index = HashMap::new();
        // Canonical matrices in lexicographic order of their entries.
        for key in 0..q.pow(4) {
            let m = Mat2([key / (q * q * q), key / (q * q) % q, key / q % q, key % q]);
            if m.0 == [0; 4] || m.canonical(q) != m {
                continue;
            }
            let det = m.det(q);
            if det == 0 {
                continue;
            }
            let s = if legendre(det, q) == 1 { 0 } else { 1 };
            index.insert(key, sides[s].len());
            sides[s].push(m);
        }
        Ok(LpsGraph {
            params,
            generators,
            inverse_slot,
            sides,
            index,
        })
    }

    pub fn params(&self) -> &LpsParams {
        &self.params
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }

    pub fn vertex(&self, side: Side, v: usize) -> Option<Mat2> {
        self.sides[side_idx(side)].get(v).copied()
    }

    /// Index of a canonical matrix within its side.
    pub fn index_of(&self, m: &Mat2) -> Option<(Side, usize)> {
        let q = self.params.q;
        let c = m.canonical(q);
        let &i = self.index.get(&c.key(q))?;
        let side = if legendre(c.det(q), q) == 1 { Side::Left } else { Side::Right };
        Some((side, i))
    }

    pub fn manifest(&self) -> LpsManifest {
        let (s, c) = sqrt_minus_one(self.params.q);
        LpsManifest {
            p: self.params.p,
            q: self.params.q,
            side_size: self.sides[0].len(),
            sqrt_minus_one: s,
            nonresidue_base: c,
            generators: self.generators.iter().map(|g| g.0).collect(),
        }
    }
}

impl ExplicitBipartiteGraph for LpsGraph {
    fn n_left(&self) -> usize {
        self.sides[0].len()
    }

    fn n_right(&self) -> usize {
        self.sides[1].len()
    }

    fn degree(&self, _side: Side, _vertex: usize) -> usize {
        self.generators.len()
    }

    fn neighbor(&self, side: Side, vertex: usize, slot: usize) -> Result<(usize, usize), GraphError> {
        let m = self.vertex(side, vertex).ok_or(GraphError::VertexOutOfRange {
            vertex,
            size: self.side_len(side),
        })?;
        let g = self.generators.get(slot).ok_or(GraphError::SlotOutOfRange {
            vertex,
            slot,
            degree: self.generators.len(),
        })?;
        let (s, w) = self
            .index_of(&g.mul(&m, self.params.q))
            .expect("product of invertible matrices is invertible");
        debug_assert_eq!(s, side.opposite());
        Ok((w, self.inverse_slot[slot]))
    }
}

pub fn lps_graph(p: u64, q: u64) -> Result<LpsGraph, LpsError> {
    LpsGraph::new(LpsParams::new(p, q)?)
}
