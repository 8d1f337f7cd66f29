//! Prime-field arithmetic over `Z_q` and the truncated polynomial ring
//! `Z_q[x]/(x^{r+1})`.
//!
//! Every arithmetic operation performed through this module (and through the
//! incidence-graph routines that build on it) is tallied in a thread-local
//! counter, see [`count_field_ops`]. Neighbor-oracle locality is asserted by
//! counting operations rather than by timing.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large (must be below 2^32)")]
    ModulusTooLarge(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("polynomial with zero constant term is not invertible")]
    NotInvertible,
    #[error("truncation degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

thread_local! {
    static FIELD_OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn tally(n: u64) {
    FIELD_OPS.with(|c| c.set(c.get() + n));
}

/// Runs `f` and returns its result together with the number of field
/// operations it performed on the current thread.
pub fn count_field_ops<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = FIELD_OPS.with(Cell::get);
    let out = f();
    let after = FIELD_OPS.with(Cell::get);
    (out, after - before)
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A validated prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q >= 1 << 32 {
            return Err(FieldError::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Modulus(q))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn elem(self, value: u64) -> FieldElem {
        FieldElem {
            value: value % self.0,
            modulus: self,
        }
    }

    /// Reduces a signed integer into `[0, q)`.
    pub fn elem_signed(self, value: i64) -> FieldElem {
        self.elem(value.rem_euclid(self.0 as i64) as u64)
    }

    #[inline]
    pub(crate) fn add(self, a: u64, b: u64) -> u64 {
        tally(1);
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub(self, a: u64, b: u64) -> u64 {
        tally(1);
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub(crate) fn mul(self, a: u64, b: u64) -> u64 {
        tally(1);
        (a * b) % self.0
    }

    #[inline]
    pub(crate) fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub(crate) fn inv(self, a: u64) -> Result<u64, FieldError> {
        if a.is_multiple_of(self.0) {
            return Err(FieldError::ZeroInverse);
        }
        // Extended Euclid; the operation count is charged as one inversion.
        tally(1);
        let (mut r0, mut r1) = (self.0 as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quo = r0 / r1;
            (r0, r1) = (r1, r0 - quo * r1);
            (t0, t1) = (t1, t0 - quo * t1);
        }
        Ok(t0.rem_euclid(self.0 as i64) as u64)
    }
}

impl TryFrom<u64> for Modulus {
    type Error = FieldError;
    fn try_from(q: u64) -> Result<Self, Self::Error> {
        Modulus::new(q)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An element of `Z_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    modulus: Modulus,
}

impl FieldElem {
    pub fn new(value: u64, q: u64) -> Result<Self, FieldError> {
        Ok(Modulus::new(q)?.elem(value))
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_modulus(self, other: Self) -> Result<Modulus, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.get(),
                other.modulus.get(),
            ));
        }
        Ok(self.modulus)
    }

    pub fn checked_add(self, other: Self) -> Result<Self, FieldError> {
        let m = self.same_modulus(other)?;
        Ok(m.elem(m.add(self.value, other.value)))
    }

    pub fn checked_sub(self, other: Self) -> Result<Self, FieldError> {
        let m = self.same_modulus(other)?;
        Ok(m.elem(m.sub(self.value, other.value)))
    }

    pub fn checked_mul(self, other: Self) -> Result<Self, FieldError> {
        let m = self.same_modulus(other)?;
        Ok(m.elem(m.mul(self.value, other.value)))
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        let v = self.modulus.inv(self.value)?;
        Ok(self.modulus.elem(v))
    }

    pub fn pow(self, exp: u64) -> Self {
        self.modulus.elem(pow_mod(self.value, exp, self.modulus.get()))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

// Operator forms panic on modulus mismatch; use the `checked_*` methods when
// the operands may come from different fields.
impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field modulus mismatch")
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field modulus mismatch")
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field modulus mismatch")
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> Self {
        self.modulus.elem(self.modulus.neg(self.value))
    }
}

/// An element of `Z_q[x]/(x^{r+1})`, stored as `r + 1` coefficients from
/// `x^0` upward.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncPoly {
    coeffs: Vec<u64>,
    modulus: Modulus,
}

impl TruncPoly {
    /// Builds a polynomial truncated at degree `r` from raw coefficient values.
    pub fn from_values(modulus: Modulus, r: usize, values: &[u64]) -> Result<Self, FieldError> {
        if values.len() != r + 1 {
            return Err(FieldError::CoefficientCount {
                expected: r + 1,
                got: values.len(),
            });
        }
        Ok(TruncPoly {
            coeffs: values.iter().map(|v| v % modulus.get()).collect(),
            modulus,
        })
    }

    pub fn from_elems(r: usize, elems: &[FieldElem]) -> Result<Self, FieldError> {
        let Some(first) = elems.first() else {
            return Err(FieldError::CoefficientCount {
                expected: r + 1,
                got: 0,
            });
        };
        let modulus = first.modulus();
        for e in elems {
            first.same_modulus(*e)?;
        }
        let values: Vec<u64> = elems.iter().map(|e| e.value()).collect();
        TruncPoly::from_values(modulus, r, &values)
    }

    pub fn zero(modulus: Modulus, r: usize) -> Self {
        TruncPoly {
            coeffs: vec![0; r + 1],
            modulus,
        }
    }

    pub fn one(modulus: Modulus, r: usize) -> Self {
        let mut p = TruncPoly::zero(modulus, r);
        p.coeffs[0] = 1 % modulus.get();
        p
    }

    /// Truncation degree `r`.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.modulus.elem(self.coeffs[i])
    }

    pub fn values(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn compatible(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.get(),
                other.modulus.get(),
            ));
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(FieldError::DegreeMismatch(
                self.degree_bound(),
                other.degree_bound(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.compatible(other)?;
        let m = self.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| m.add(a, b))
            .collect();
        Ok(TruncPoly { coeffs, modulus: m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.compatible(other)?;
        let m = self.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| m.sub(a, b))
            .collect();
        Ok(TruncPoly { coeffs, modulus: m })
    }

    /// Product truncated at degree `r`.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.compatible(other)?;
        let m = self.modulus;
        let n = self.coeffs.len();
        let mut out = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] = m.add(out[i + j], m.mul(a, b));
            }
        }
        Ok(TruncPoly {
            coeffs: out,
            modulus: m,
        })
    }

    /// Multiplicative inverse by triangular back-substitution: solving
    /// `a * b = 1` coefficient by coefficient, `b_n = -a_0^{-1} * sum_{i>=1} a_i b_{n-i}`.
    pub fn inverse(&self) -> Result<Self, FieldError> {
        let m = self.modulus;
        if self.coeffs[0] == 0 {
            return Err(FieldError::NotInvertible);
        }
        let inv0 = m.inv(self.coeffs[0])?;
        let n = self.coeffs.len();
        let mut b = vec![0u64; n];
        b[0] = inv0;
        for k in 1..n {
            let mut acc = 0;
            for i in 1..=k {
                acc = m.add(acc, m.mul(self.coeffs[i], b[k - i]));
            }
            b[k] = m.neg(m.mul(acc, inv0));
        }
        Ok(TruncPoly {
            coeffs: b,
            modulus: m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f7(v: u64) -> FieldElem {
        FieldElem::new(v, 7).unwrap()
    }

    fn poly7(vals: &[u64]) -> TruncPoly {
        TruncPoly::from_values(Modulus::new(7).unwrap(), vals.len() - 1, vals).unwrap()
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(4_294_967_291));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(Modulus::new(9), Err(FieldError::NotPrime(9)));
        assert!(FieldElem::new(1, 1).is_err());
    }

    #[test]
    fn field_examples() {
        assert_eq!(f7(1).inv().unwrap(), f7(1));
        // 3 * 5 = 15 = 2*7 + 1
        assert_eq!(f7(3).inv().unwrap(), f7(5));
        assert_eq!(f7(6) + f7(3), f7(2));
        assert_eq!(f7(0).inv(), Err(FieldError::ZeroInverse));
        assert_eq!(-f7(3), f7(4));
    }

    #[test]
    fn modulus_mismatch() {
        let a = f7(3);
        let b = FieldElem::new(3, 11).unwrap();
        assert_eq!(a.checked_add(b), Err(FieldError::ModulusMismatch(7, 11)));
        assert!(poly7(&[1, 0]).mul(&poly7(&[1, 0, 0])).is_err());
    }

    #[test]
    fn poly_examples() {
        assert_eq!(poly7(&[1, 0, 0]).mul(&poly7(&[1, 0, 0])).unwrap(), poly7(&[1, 0, 0]));
        // (1 + x)(1 - x + x^2) = 1 + x^3 = 1 mod x^3
        assert_eq!(
            poly7(&[1, 1, 0]).mul(&poly7(&[1, 6, 1])).unwrap(),
            poly7(&[1, 0, 0])
        );
        assert!(poly7(&[3, 2, 5]).mul(&poly7(&[0, 0, 0])).unwrap().is_zero());
        assert_eq!(poly7(&[1, 0, 0]).inverse().unwrap(), poly7(&[1, 0, 0]));
        assert_eq!(poly7(&[1, 1, 0]).inverse().unwrap(), poly7(&[1, 6, 1]));
        assert_eq!(poly7(&[0, 1, 0]).inverse(), Err(FieldError::NotInvertible));
    }

    #[test]
    fn op_counter_counts() {
        let (_, ops) = count_field_ops(|| poly7(&[1, 2, 3]).mul(&poly7(&[4, 5, 6])).unwrap());
        // 6 products and 6 accumulations
        assert_eq!(ops, 12);
    }

    fn arb_poly(q: u64, r: usize) -> impl Strategy<Value = TruncPoly> {
        proptest::collection::vec(0..q, r + 1)
            .prop_map(move |v| TruncPoly::from_values(Modulus::new(q).unwrap(), r, &v).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_round_trip(p in arb_poly(13, 5)) {
            prop_assume!(p.values()[0] != 0);
            let inv = p.inverse().unwrap();
            prop_assert_eq!(p.mul(&inv).unwrap(), TruncPoly::one(p.modulus(), 5));
        }

        #[test]
        fn ring_axioms(a in arb_poly(11, 4), b in arb_poly(11, 4), c in arb_poly(11, 4)) {
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn field_inverse_involution(v in 1u64..101) {
            let a = FieldElem::new(v, 101).unwrap();
            prop_assert_eq!(a.inv().unwrap().inv().unwrap(), a);
            prop_assert_eq!(a * a.inv().unwrap(), FieldElem::new(1, 101).unwrap());
        }
    }
}
