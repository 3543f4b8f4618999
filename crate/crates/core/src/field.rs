//! Exact arithmetic in prime fields GF(p) and binary extension fields GF(2^m).
//!
//! Elements are represented canonically as integers in `[0, q)`. For binary
//! fields the integer is the coefficient bit-vector of a polynomial over GF(2)
//! of degree below `m`, so serialized values are identical across
//! implementations that agree on the modulus.
//!
//! [`Field`] is a small `Copy` descriptor; the raw arithmetic methods on it
//! (`add`, `mul`, ...) take and return plain `u64` values and assume they are
//! canonical. [`FieldElement`] pairs a value with its field and checks that
//! both operands live in the same field.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order is `2^32`.
pub const MAX_BINARY_DEGREE: u32 = 32;
/// Prime moduli must be below `2^32` so products fit in a `u64`.
pub const MAX_PRIME: u64 = u32::MAX as u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the supported maximum {MAX_PRIME}")]
    PrimeTooLarge(u64),
    #[error("binary extension degree {0} outside 1..={MAX_BINARY_DEGREE}")]
    BadDegree(u32),
    #[error("modulus {modulus:#x} does not have degree {degree}")]
    ModulusDegree { modulus: u64, degree: u32 },
    #[error("modulus {0:#x} is reducible over GF(2)")]
    ReducibleModulus(u64),
    #[error("value {value} is not an element of a field of order {order}")]
    OutOfRange { value: u64, order: u64 },
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("operands belong to different fields ({0} and {1})")]
    MixedFields(Field, Field),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Prime,
    Binary,
}

/// A finite field descriptor: GF(p) or GF(2^m) with a fixed irreducible modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecFile", into = "FieldSpecFile")]
pub struct Field {
    kind: FieldKind,
    // p for prime fields, m for binary fields
    p_or_m: u64,
    // p for prime fields, the modulus bitmask (with bit m set) for binary fields
    modulus: u64,
    order: u64,
}

/// On-disk form of a field: `{"kind":"prime"|"binary","p_or_m":int,"modulus":int}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpecFile {
    pub kind: FieldKind,
    pub p_or_m: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
}

impl TryFrom<FieldSpecFile> for Field {
    type Error = FieldError;

    fn try_from(f: FieldSpecFile) -> Result<Self, Self::Error> {
        Field::build(f.kind, f.p_or_m, f.modulus)
    }
}

impl From<Field> for FieldSpecFile {
    fn from(f: Field) -> Self {
        FieldSpecFile {
            kind: f.kind,
            p_or_m: f.p_or_m,
            modulus: match f.kind {
                FieldKind::Prime => None,
                FieldKind::Binary => Some(f.modulus),
            },
        }
    }
}

impl Field {
    /// Builds a field of the given kind. `modulus` is only meaningful for binary
    /// fields; when absent the least irreducible polynomial of degree `m` is used.
    pub fn build(kind: FieldKind, p_or_m: u64, modulus: Option<u64>) -> Result<Field, FieldError> {
        match kind {
            FieldKind::Prime => Field::prime(p_or_m),
            FieldKind::Binary => {
                let m = u32::try_from(p_or_m).map_err(|_| FieldError::BadDegree(u32::MAX))?;
                match modulus {
                    Some(modulus) => Field::binary_with_modulus(m, modulus),
                    None => Field::binary(m),
                }
            }
        }
    }

    pub fn prime(p: u64) -> Result<Field, FieldError> {
        if p > MAX_PRIME {
            return Err(FieldError::PrimeTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field { kind: FieldKind::Prime, p_or_m: p, modulus: p, order: p })
    }

    /// GF(2^m) with the default (numerically least irreducible) modulus.
    pub fn binary(m: u32) -> Result<Field, FieldError> {
        check_degree(m)?;
        let modulus = default_binary_modulus(m);
        Field::binary_with_modulus(m, modulus)
    }

    pub fn binary_with_modulus(m: u32, modulus: u64) -> Result<Field, FieldError> {
        check_degree(m)?;
        if gf2_degree(modulus) != Some(m) {
            return Err(FieldError::ModulusDegree { modulus, degree: m });
        }
        if !gf2_is_irreducible(modulus) {
            return Err(FieldError::ReducibleModulus(modulus));
        }
        Ok(Field { kind: FieldKind::Binary, p_or_m: m as u64, modulus, order: 1u64 << m })
    }

    /// Smallest field of the requested kind whose order exceeds `min_order`.
    pub fn smallest_above(kind: FieldKind, min_order: u64) -> Result<Field, FieldError> {
        match kind {
            FieldKind::Prime => {
                let mut p = min_order + 1;
                while !is_prime(p) {
                    p += 1;
                }
                Field::prime(p)
            }
            FieldKind::Binary => {
                let mut m = 1;
                while (1u64 << m) <= min_order {
                    m += 1;
                }
                Field::binary(m)
            }
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// `p` for a prime field, `m` for GF(2^m).
    pub fn p_or_m(&self) -> u64 {
        self.p_or_m
    }

    /// The modulus: `p` for prime fields, the polynomial bitmask for binary ones.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn characteristic(&self) -> u64 {
        match self.kind {
            FieldKind::Prime => self.p_or_m,
            FieldKind::Binary => 2,
        }
    }

    pub fn is_characteristic_two(&self) -> bool {
        self.characteristic() == 2
    }

    pub fn contains(&self, v: u64) -> bool {
        v < self.order
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::OutOfRange { value, order: self.order });
        }
        Ok(FieldElement { value, field: *self })
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Binary => a ^ b,
            FieldKind::Prime => {
                let s = a + b;
                if s >= self.modulus {
                    s - self.modulus
                } else {
                    s
                }
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        match self.kind {
            FieldKind::Binary => a,
            FieldKind::Prime => {
                if a == 0 {
                    0
                } else {
                    self.modulus - a
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Prime => (a * b) % self.modulus,
            FieldKind::Binary => {
                // carryless shift-and-reduce
                let top = 1u64 << self.p_or_m;
                let (mut a, mut b, mut r) = (a, b, 0u64);
                while b != 0 {
                    if b & 1 == 1 {
                        r ^= a;
                    }
                    b >>= 1;
                    a <<= 1;
                    if a & top != 0 {
                        a ^= self.modulus;
                    }
                }
                r
            }
        }
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::InverseOfZero);
        }
        // a^(q-2) = a^-1 in the multiplicative group of order q-1
        Ok(self.pow(a, self.order - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Embeds an integer: `n mod p` for prime fields, `n mod 2` for binary ones.
    pub fn from_int(&self, n: u64) -> u64 {
        match self.kind {
            FieldKind::Prime => n % self.modulus,
            FieldKind::Binary => n & 1,
        }
    }

    /// The numerically smallest generator of the multiplicative group.
    pub fn primitive_element(&self) -> u64 {
        if self.order == 2 {
            return 1;
        }
        let group = self.order - 1;
        let factors = prime_factors(group);
        (2..self.order)
            .find(|&g| factors.iter().all(|&f| self.pow(g, group / f) != 1))
            .expect("every finite field has a primitive element")
    }

    /// `count` distinct nonzero elements `g^0, g^1, ...` for the primitive element `g`.
    pub fn primitive_powers(&self, count: usize) -> Option<Vec<u64>> {
        if count as u64 > self.order - 1 {
            return None;
        }
        let g = self.primitive_element();
        let mut out = Vec::with_capacity(count);
        let mut x = 1;
        for _ in 0..count {
            out.push(x);
            x = self.mul(x, g);
        }
        Some(out)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Prime => write!(f, "GF({})", self.p_or_m),
            FieldKind::Binary => write!(f, "GF(2^{}; {:#x})", self.p_or_m, self.modulus),
        }
    }
}

/// A value tagged with its field. Operations check that both operands agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: Field,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<Field, FieldError> {
        if self.field != other.field {
            return Err(FieldError::MixedFields(self.field, other.field));
        }
        Ok(self.field)
    }

    fn with(&self, value: u64) -> FieldElement {
        FieldElement { value, field: self.field }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let f = self.same_field(other)?;
        Ok(self.with(f.div(self.value, other.value)?))
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        self.with(self.field.pow(self.value, e))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn check_degree(m: u32) -> Result<(), FieldError> {
    if m == 0 || m > MAX_BINARY_DEGREE {
        return Err(FieldError::BadDegree(m));
    }
    Ok(())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn gf2_degree(p: u64) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(63 - p.leading_zeros())
    }
}

fn gf2_rem(mut a: u64, b: u64) -> u64 {
    let db = gf2_degree(b).expect("nonzero divisor");
    while let Some(da) = gf2_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree `1..=deg/2`.
pub fn gf2_is_irreducible(p: u64) -> bool {
    let Some(deg) = gf2_degree(p) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if gf2_rem(p, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// Numerically least irreducible polynomial of degree `m` (x^3+x+1 for m=3,
/// x^8+x^4+x^3+x+1 for m=8).
pub fn default_binary_modulus(m: u32) -> u64 {
    let top = 1u64 << m;
    (top..top << 1)
        .find(|&p| gf2_is_irreducible(p))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn build_examples() {
        let f11 = Field::build(FieldKind::Prime, 11, None).unwrap();
        assert_eq!(f11.order(), 11);
        let f8 = Field::build(FieldKind::Binary, 3, Some(0b1011)).unwrap();
        assert_eq!(f8.order(), 8);
        assert_eq!(f8.characteristic(), 2);
        assert_eq!(Field::prime(4), Err(FieldError::NotPrime(4)));
        assert_eq!(Field::binary_with_modulus(3, 0b1001), Err(FieldError::ReducibleModulus(0b1001)));
        assert!(matches!(Field::binary_with_modulus(3, 0b111), Err(FieldError::ModulusDegree { .. })));
    }

    #[test]
    fn default_moduli() {
        assert_eq!(default_binary_modulus(3), 0b1011);
        assert_eq!(default_binary_modulus(8), 0x11b);
        assert_eq!(default_binary_modulus(2), 0b111);
    }

    #[test]
    fn arithmetic_examples() {
        let f11 = Field::prime(11).unwrap();
        assert_eq!(f11.mul(3, 4), 1);
        assert_eq!(f11.inv(2).unwrap(), 6);
        assert_eq!(f11.inv(0), Err(FieldError::InverseOfZero));
        let f8 = Field::binary(3).unwrap();
        // x * x^2 = x^3 = x + 1
        assert_eq!(f8.mul(0b010, 0b100), 0b011);
    }

    #[test]
    fn characteristic_two() {
        assert!(Field::binary(3).unwrap().is_characteristic_two());
        assert!(!Field::prime(11).unwrap().is_characteristic_two());
        assert!(Field::prime(2).unwrap().is_characteristic_two());
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = Field::prime(11).unwrap().element(3).unwrap();
        let b = Field::prime(13).unwrap().element(3).unwrap();
        assert!(matches!(a.add(&b), Err(FieldError::MixedFields(..))));
        assert!(Field::prime(11).unwrap().element(11).is_err());
    }

    #[test]
    fn primitive_elements() {
        assert_eq!(Field::prime(11).unwrap().primitive_element(), 2);
        assert_eq!(Field::prime(7).unwrap().primitive_element(), 3);
        assert_eq!(Field::binary(3).unwrap().primitive_element(), 2);
        // x is not primitive modulo the AES polynomial; x+1 is
        assert_eq!(Field::binary(8).unwrap().primitive_element(), 3);
        let f = Field::prime(11).unwrap();
        let pw = f.primitive_powers(10).unwrap();
        let mut sorted = pw.clone();
        sorted.sort();
        assert_eq!(sorted, (1..11).collect::<Vec<_>>());
        assert!(f.primitive_powers(11).is_none());
    }

    #[test]
    fn serde_round_trip() {
        let f = Field::binary(8).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"kind":"binary","p_or_m":8,"modulus":283}"#);
        assert_eq!(serde_json::from_str::<Field>(&s).unwrap(), f);
        let p: Field = serde_json::from_str(r#"{"kind":"prime","p_or_m":11}"#).unwrap();
        assert_eq!(p, Field::prime(11).unwrap());
        assert!(serde_json::from_str::<Field>(r#"{"kind":"prime","p_or_m":12}"#).is_err());
    }

    #[test]
    fn smallest_above() {
        assert_eq!(Field::smallest_above(FieldKind::Binary, 236).unwrap().order(), 256);
        assert_eq!(Field::smallest_above(FieldKind::Prime, 236).unwrap().order(), 239);
    }

    fn fields() -> impl Strategy<Value = Field> {
        prop_oneof![
            Just(Field::prime(2).unwrap()),
            Just(Field::prime(11).unwrap()),
            Just(Field::prime(65521).unwrap()),
            Just(Field::binary(3).unwrap()),
            Just(Field::binary(8).unwrap()),
            Just(Field::binary(16).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn field_axioms(f in fields(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (a, b, c) = (a % f.order(), b % f.order(), c % f.order());
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
            prop_assert_eq!(f.mul(a, 1), a);
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            if f.is_characteristic_two() {
                prop_assert_eq!(f.add(a, a), 0);
            }
        }
    }
}
