//! Finite fields `F_{p^s}` in a dense power-basis representation.
//!
//! An element is stored as the integer `c_0 + c_1 p + ... + c_{s-1} p^{s-1}`
//! where `c_i` are its coordinates in the power basis of the field modulus.
//! This integer order is the canonical enumeration order of the field (colex
//! on the coefficient vector), so `0` and `1` are the first two elements.
//!
//! Two layers are exposed:
//!
//! * [`FieldElem`] values carry the identity of their field, and the checked
//!   operations on [`FieldDesc`] (`add`, `mul`, `inv`, ...) reject operands
//!   from different fields.
//! * The `*_raw` kernels work directly on `u32` element indices. They are what
//!   the polynomial, Groebner and point-scanning code uses in inner loops.
//!
//! Characteristic 2 takes a bit-packed carry-less multiplication path; odd
//! characteristic uses schoolbook multiplication on the digit vectors.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Default cap on the field cardinality.
pub const DEFAULT_FIELD_BOUND: u64 = 1 << 20;

const MAX_EXT_DEGREE: u32 = 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of size {p}^{s} exceeds the configured bound {bound}")]
    TooLarge { p: u64, s: u32, bound: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands belong to different fields ({0} and {1})")]
    MixedFields(String, String),
    #[error("cannot embed a degree-{from} field into a degree-{to} field")]
    NotASubfield { from: u32, to: u32 },
    #[error("invalid field element: {0}")]
    InvalidElement(String),
    #[error("cannot parse field description {0:?} (expected p^s)")]
    Parse(String),
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Identity of a field, used to catch operations mixing elements of
/// different fields. The modulus is a function of `(p, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldId {
    pub p: u32,
    pub s: u32,
}

struct FieldInner {
    p: u32,
    s: u32,
    q: u32,
    /// Monic modulus, lowest coefficient first, length `s + 1`.
    modulus: Vec<u32>,
    /// For p = 2: the modulus as a bit mask including the leading term.
    mod_bits: u64,
}

/// A finite field `F_{p^s}` together with its defining modulus.
#[derive(Clone)]
pub struct FieldDesc {
    inner: Arc<FieldInner>,
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.s == other.inner.s
                && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FieldDesc {}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (modulus {:?})", self.p(), self.s(), self.inner.modulus)
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p(), self.s())
    }
}

/// An element of a specific finite field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    field: FieldId,
    value: u32,
}

impl FieldElem {
    pub fn field_id(&self) -> FieldId {
        self.field
    }

    /// Canonical index of the element (its position in [`FieldDesc::enumerate`]).
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

// Univariate polynomials over F_p, lowest coefficient first, used only for the
// irreducibility scan.
fn upoly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn upoly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    // m monic
    let mut r = a.to_vec();
    upoly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (j, &mj) in m.iter().enumerate() {
                let t = (lead as u64 * mj as u64 % p as u64) as u32;
                r[shift + j] = (r[shift + j] + p - t) % p;
            }
        }
        r.pop();
        upoly_trim(&mut r);
    }
    r
}

fn upoly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
    upoly_rem(&out, m, p)
}

fn upoly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    upoly_trim(&mut a);
    upoly_trim(&mut b);
    while !b.is_empty() {
        // make b monic for the remainder step
        let inv = pow_mod(*b.last().unwrap() as u64, p as u64 - 2, p as u64) as u32;
        let bm: Vec<u32> = b.iter().map(|&c| (c as u64 * inv as u64 % p as u64) as u32).collect();
        let r = upoly_rem(&a, &bm, p);
        a = bm;
        b = r;
    }
    a
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Irreducibility over F_p of a monic polynomial of degree `s`:
/// `gcd(f, x^{p^i} - x) = 1` for every `i <= s/2`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let s = f.len() - 1;
    if s <= 1 {
        return s == 1;
    }
    let x = vec![0, 1];
    let mut xp = x.clone(); // x^{p^i} mod f
    for _ in 1..=s / 2 {
        // raise to the p-th power
        let mut acc = vec![1u32];
        let mut base = xp.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = upoly_mulmod(&acc, &base, f, p);
            }
            base = upoly_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        xp = acc;
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = upoly_gcd(f, &diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl FieldDesc {
    /// Creates `F_{p^s}` with the default size bound.
    pub fn new(p: u64, s: u32) -> Result<Self, GfError> {
        Self::with_bound(p, s, DEFAULT_FIELD_BOUND)
    }

    /// Creates `F_{p^s}`; the modulus is the lexicographically smallest monic
    /// irreducible polynomial of degree `s`, reading coefficients from `x^{s-1}`
    /// down to the constant term.
    pub fn with_bound(p: u64, s: u32, bound: u64) -> Result<Self, GfError> {
        if s == 0 {
            return Err(GfError::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        let too_large = GfError::TooLarge { p, s, bound };
        if s > MAX_EXT_DEGREE {
            return Err(too_large);
        }
        let q = p.checked_pow(s).ok_or(too_large.clone())?;
        if q > bound || q > u32::MAX as u64 {
            return Err(too_large);
        }
        let p32 = p as u32;
        let modulus = if s == 1 {
            vec![0, 1]
        } else {
            (0..q)
                .map(|t| {
                    let mut coeffs = digits(t as u32, p32, s);
                    coeffs.push(1);
                    coeffs
                })
                .find(|f| is_irreducible(f, p32))
                .expect("an irreducible polynomial exists in every degree")
        };
        let mod_bits = if p == 2 {
            modulus.iter().enumerate().fold(0u64, |acc, (i, &c)| acc | ((c as u64) << i))
        } else {
            0
        };
        Ok(Self {
            inner: Arc::new(FieldInner { p: p32, s, q: q as u32, modulus, mod_bits }),
        })
    }

    pub fn p(&self) -> u32 {
        self.inner.p
    }

    pub fn s(&self) -> u32 {
        self.inner.s
    }

    /// Cardinality `p^s`.
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    pub fn id(&self) -> FieldId {
        FieldId { p: self.inner.p, s: self.inner.s }
    }

    /// Monic modulus, lowest coefficient first.
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.inner.s == 1
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { field: self.id(), value: 0 }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem { field: self.id(), value: 1 }
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem, GfError> {
        if value >= self.q() {
            return Err(GfError::InvalidElement(format!("index {value} >= {}", self.q())));
        }
        Ok(FieldElem { field: self.id(), value })
    }

    /// Element with the given power-basis coordinates (missing ones are zero).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem, GfError> {
        if coeffs.len() > self.s() as usize {
            return Err(GfError::InvalidElement(format!("{} coordinates for degree {}", coeffs.len(), self.s())));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.p()) {
            return Err(GfError::InvalidElement(format!("coordinate {c} not reduced mod {}", self.p())));
        }
        Ok(FieldElem { field: self.id(), value: pack(coeffs, self.p()) })
    }

    /// Power-basis coordinates of an element index, length `s`.
    pub fn coeffs_raw(&self, a: u32) -> Vec<u32> {
        digits(a, self.p(), self.s())
    }

    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        self.coeffs_raw(a.value)
    }

    /// All `q` elements in canonical order.
    pub fn enumerate(&self) -> impl Iterator<Item = FieldElem> + '_ {
        let id = self.id();
        (0..self.q()).map(move |value| FieldElem { field: id, value })
    }

    fn check(&self, a: FieldElem) -> Result<u32, GfError> {
        if a.field != self.id() {
            return Err(GfError::MixedFields(
                format!("{}^{}", a.field.p, a.field.s),
                self.to_string(),
            ));
        }
        Ok(a.value)
    }

    fn wrap(&self, value: u32) -> FieldElem {
        FieldElem { field: self.id(), value }
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, GfError> {
        Ok(self.wrap(self.add_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, GfError> {
        Ok(self.wrap(self.sub_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, GfError> {
        Ok(self.wrap(self.mul_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn neg(&self, a: FieldElem) -> Result<FieldElem, GfError> {
        Ok(self.wrap(self.neg_raw(self.check(a)?)))
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, GfError> {
        let v = self.check(a)?;
        if v == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.wrap(self.inv_raw(v)))
    }

    pub fn pow(&self, a: FieldElem, n: u64) -> Result<FieldElem, GfError> {
        Ok(self.wrap(self.pow_raw(self.check(a)?, n)))
    }

    #[inline]
    pub fn add_raw(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.inner;
        if inner.p == 2 {
            return a ^ b;
        }
        if inner.s == 1 {
            let s = a + b;
            return if s >= inner.p { s - inner.p } else { s };
        }
        let p = inner.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..inner.s {
            let mut d = a % p + b % p;
            if d >= p {
                d -= p;
            }
            out += d * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    #[inline]
    pub fn neg_raw(&self, a: u32) -> u32 {
        let inner = &*self.inner;
        if inner.p == 2 || a == 0 {
            return a;
        }
        if inner.s == 1 {
            return inner.p - a;
        }
        let p = inner.p;
        let mut a = a;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..inner.s {
            let d = a % p;
            if d != 0 {
                out += (p - d) * place;
            }
            a /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    #[inline]
    pub fn sub_raw(&self, a: u32, b: u32) -> u32 {
        self.add_raw(a, self.neg_raw(b))
    }

    #[inline]
    pub fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.inner;
        if a == 0 || b == 0 {
            return 0;
        }
        if inner.s == 1 {
            return (a as u64 * b as u64 % inner.p as u64) as u32;
        }
        if inner.p == 2 {
            return gf2_mul(a, b, inner.s, inner.mod_bits);
        }
        self.mul_odd(a, b)
    }

    fn mul_odd(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.inner;
        let p = inner.p as u64;
        let s = inner.s as usize;
        let mut da = [0u64; MAX_EXT_DEGREE as usize];
        let mut db = [0u64; MAX_EXT_DEGREE as usize];
        let (mut x, mut y) = (a, b);
        for i in 0..s {
            da[i] = (x % inner.p) as u64;
            db[i] = (y % inner.p) as u64;
            x /= inner.p;
            y /= inner.p;
        }
        let mut prod = [0u64; 2 * MAX_EXT_DEGREE as usize];
        for i in 0..s {
            if da[i] == 0 {
                continue;
            }
            for j in 0..s {
                prod[i + j] += da[i] * db[j];
            }
        }
        for c in prod.iter_mut().take(2 * s - 1) {
            *c %= p;
        }
        for i in (s..2 * s - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..s {
                let t = c * inner.modulus[j] as u64 % p;
                prod[i - s + j] = (prod[i - s + j] + p - t) % p;
            }
        }
        let mut out = 0u32;
        for i in (0..s).rev() {
            out = out * inner.p + prod[i] as u32;
        }
        out
    }

    pub fn pow_raw(&self, a: u32, mut n: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            n >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `inv_raw(0)` returns 0.
    pub fn inv_raw(&self, a: u32) -> u32 {
        self.pow_raw(a, self.q() as u64 - 2)
    }

    /// `a^{q0}`: the Frobenius relative to a subfield of cardinality `q0`.
    pub fn frobenius_raw(&self, a: u32, q0: u64) -> u32 {
        self.pow_raw(a, q0)
    }

    /// Element `c` of the prime subfield, as an index in this field.
    #[inline]
    pub fn from_int(&self, c: u64) -> u32 {
        (c % self.p() as u64) as u32
    }

    /// Evaluates a polynomial with coefficients in this field (lowest first).
    pub fn eval_univariate_raw(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add_raw(self.mul_raw(acc, x), c))
    }
}

fn gf2_mul(a: u32, b: u32, s: u32, mod_bits: u64) -> u32 {
    let mut r: u64 = 0;
    let mut x = a as u64;
    let mut y = b;
    while y != 0 {
        if y & 1 == 1 {
            r ^= x;
        }
        x <<= 1;
        y >>= 1;
    }
    let mut i = 2 * s - 2;
    while i >= s {
        if (r >> i) & 1 == 1 {
            r ^= mod_bits << (i - s);
        }
        i -= 1;
    }
    r as u32
}

fn digits(mut a: u32, p: u32, s: u32) -> Vec<u32> {
    (0..s)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

impl FromStr for FieldDesc {
    type Err = GfError;

    /// Parses `"p^s"` (or a bare prime `"p"`).
    fn from_str(text: &str) -> Result<Self, GfError> {
        let err = || GfError::Parse(text.to_string());
        let (p, s) = match text.trim().split_once('^') {
            Some((p, s)) => (p.trim().parse::<u64>().map_err(|_| err())?, s.trim().parse::<u32>().map_err(|_| err())?),
            None => (text.trim().parse::<u64>().map_err(|_| err())?, 1),
        };
        FieldDesc::new(p, s)
    }
}

/// Ring embedding `F_{p^s} -> F_{p^{s'}}` for `s | s'`.
///
/// The generator of the source maps to the smallest root (in canonical order)
/// of the source modulus inside the target.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FieldDesc,
    target: FieldDesc,
    /// Images of the power basis `1, t, ..., t^{s-1}`.
    basis: Vec<u32>,
}

impl Embedding {
    pub fn new(source: &FieldDesc, target: &FieldDesc) -> Result<Self, GfError> {
        if source.p() != target.p() || !target.s().is_multiple_of(source.s()) {
            return Err(GfError::NotASubfield { from: source.s(), to: target.s() });
        }
        let basis = if source.s() == 1 {
            vec![1]
        } else {
            let root = (0..target.q())
                .find(|&x| target.eval_univariate_raw(source.modulus(), x) == 0)
                .expect("the modulus splits in any extension of its degree");
            let mut basis = Vec::with_capacity(source.s() as usize);
            let mut acc = 1u32;
            for _ in 0..source.s() {
                basis.push(acc);
                acc = target.mul_raw(acc, root);
            }
            basis
        };
        Ok(Self { source: source.clone(), target: target.clone(), basis })
    }

    /// Identity embedding of a field into itself.
    pub fn identity(field: &FieldDesc) -> Self {
        Self::new(field, field).expect("a field embeds into itself")
    }

    pub fn source(&self) -> &FieldDesc {
        &self.source
    }

    pub fn target(&self) -> &FieldDesc {
        &self.target
    }

    /// Relative degree `[target : source]`.
    pub fn degree(&self) -> u32 {
        self.target.s() / self.source.s()
    }

    pub fn embed_raw(&self, a: u32) -> u32 {
        if self.source.s() == 1 {
            return a;
        }
        if self.source == self.target {
            return a;
        }
        let p = self.source.p();
        let mut a = a;
        let mut acc = 0u32;
        for &b in &self.basis {
            let c = a % p;
            a /= p;
            if c != 0 {
                acc = self.target.add_raw(acc, self.target.mul_raw(c, b));
            }
        }
        acc
    }

    pub fn embed(&self, a: FieldElem) -> Result<FieldElem, GfError> {
        let v = self.source.check(a)?;
        Ok(self.target.wrap(self.embed_raw(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force irreducibility: no monic factor of degree 1..=s/2.
    fn brute_irreducible(f: &[u32], p: u32) -> bool {
        let s = f.len() - 1;
        for deg in 1..=s / 2 {
            let count = (p as u64).pow(deg as u32);
            for t in 0..count {
                let mut g = digits(t as u32, p, deg as u32);
                g.push(1);
                if upoly_rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn prime_field_f2() {
        let f = FieldDesc::new(2, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.q(), 2);
        let elems: Vec<u32> = f.enumerate().map(|e| e.value()).collect();
        assert_eq!(elems, vec![0, 1]);
    }

    #[test]
    fn f4_modulus_and_product() {
        let f = FieldDesc::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let t = f.from_coeffs(&[0, 1]).unwrap();
        let t1 = f.from_coeffs(&[1, 1]).unwrap();
        assert_eq!(f.mul(t, t1).unwrap(), f.one());
    }

    #[test]
    fn f9_modulus_matches_scan() {
        // all 9 monic quadratics x^2 + a x + b, in lexicographic order of (a, b)
        let mut smallest = None;
        'outer: for a in 0..3u32 {
            for b in 0..3u32 {
                let has_root = (0..3u32).any(|x| (x * x + a * x + b) % 3 == 0);
                if !has_root {
                    smallest = Some(vec![b, a, 1]);
                    break 'outer;
                }
            }
        }
        let f = FieldDesc::new(3, 2).unwrap();
        assert_eq!(Some(f.modulus().to_vec()), smallest);
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn moduli_agree_with_brute_irreducibility() {
        for (p, s) in [(2, 2), (2, 3), (2, 4), (2, 5), (2, 8), (3, 2), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2)] {
            let f = FieldDesc::new(p, s).unwrap();
            assert!(brute_irreducible(f.modulus(), p as u32), "{p}^{s}");
            // nothing lexicographically smaller is irreducible
            let idx = pack(&f.modulus()[..s as usize], p as u32);
            for t in 0..idx {
                let mut g = digits(t, p as u32, s);
                g.push(1);
                assert!(!brute_irreducible(&g, p as u32));
            }
        }
    }

    #[test]
    fn creation_errors() {
        assert_eq!(FieldDesc::new(4, 1).unwrap_err(), GfError::NotPrime(4));
        assert!(matches!(FieldDesc::new(2, 21), Err(GfError::TooLarge { .. })));
        assert!(FieldDesc::with_bound(2, 21, 1 << 21).is_ok());
        assert_eq!(FieldDesc::new(2, 0).unwrap_err(), GfError::ZeroDegree);
    }

    #[test]
    fn deterministic_creation() {
        let a = FieldDesc::new(3, 5).unwrap();
        let b = FieldDesc::new(3, 5).unwrap();
        assert_eq!(a.modulus(), b.modulus());
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_and_mixing_errors() {
        let f4 = FieldDesc::new(2, 2).unwrap();
        let f9 = FieldDesc::new(3, 2).unwrap();
        assert_eq!(f4.inv(f4.zero()).unwrap_err(), GfError::ZeroInverse);
        assert_eq!(f4.inv(f4.one()).unwrap(), f4.one());
        assert_eq!(f9.inv(f9.one()).unwrap(), f9.one());
        assert!(matches!(f4.add(f4.one(), f9.one()), Err(GfError::MixedFields(..))));
        for a in f9.enumerate().skip(1) {
            assert_eq!(f9.mul(a, f9.inv(a).unwrap()).unwrap(), f9.one());
        }
    }

    #[test]
    fn f9_eighth_powers() {
        let f = FieldDesc::new(3, 2).unwrap();
        for a in f.enumerate().skip(1) {
            assert_eq!(f.pow(a, 8).unwrap(), f.one());
        }
    }

    #[test]
    fn f8_multiplicative_group_is_cyclic() {
        let f = FieldDesc::new(2, 3).unwrap();
        let elems: Vec<FieldElem> = f.enumerate().collect();
        assert_eq!(elems.len(), 8);
        assert_eq!(elems[0], f.zero());
        assert_eq!(elems[1], f.one());
        let order = |a: u32| (1..=7u64).find(|&k| f.pow_raw(a, k) == 1).unwrap();
        // 7 is prime: every non-identity element generates
        assert!((2..8).all(|a| order(a) == 7));
        assert_eq!(order(1), 1);
    }

    #[test]
    fn fermat_and_field_axioms() {
        for (p, s) in [(2, 1), (2, 4), (3, 2), (5, 1), (2, 12), (3, 7)] {
            let f = FieldDesc::new(p, s).unwrap();
            for a in 0..f.q() {
                assert_eq!(f.pow_raw(a, f.q() as u64), a);
            }
        }
        for (p, s) in [(2, 2), (2, 3), (2, 4), (3, 2), (5, 1), (7, 1), (13, 1)] {
            let f = FieldDesc::new(p, s).unwrap();
            let q = f.q();
            for a in 0..q {
                assert_eq!(f.add_raw(a, f.neg_raw(a)), 0);
                for b in 0..q {
                    assert_eq!(f.add_raw(a, b), f.add_raw(b, a));
                    assert_eq!(f.mul_raw(a, b), f.mul_raw(b, a));
                    for c in 0..q {
                        assert_eq!(f.add_raw(f.add_raw(a, b), c), f.add_raw(a, f.add_raw(b, c)));
                        assert_eq!(f.mul_raw(f.mul_raw(a, b), c), f.mul_raw(a, f.mul_raw(b, c)));
                        assert_eq!(
                            f.mul_raw(a, f.add_raw(b, c)),
                            f.add_raw(f.mul_raw(a, b), f.mul_raw(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_is_a_multiplicative_injection() {
        for (p, s, t) in [(2u64, 2u32, 4u32), (3, 2, 4), (2, 1, 3), (2, 3, 6)] {
            let src = FieldDesc::new(p, s).unwrap();
            let dst = FieldDesc::new(p, t).unwrap();
            let e = Embedding::new(&src, &dst).unwrap();
            let images: Vec<u32> = (0..src.q()).map(|a| e.embed_raw(a)).collect();
            let mut sorted = images.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), images.len());
            for a in 0..src.q() {
                for b in 0..src.q() {
                    assert_eq!(e.embed_raw(src.mul_raw(a, b)), dst.mul_raw(images[a as usize], images[b as usize]));
                    assert_eq!(e.embed_raw(src.add_raw(a, b)), dst.add_raw(images[a as usize], images[b as usize]));
                }
            }
            // prime subfield is fixed
            for c in 0..p as u32 {
                assert_eq!(e.embed_raw(c), c);
            }
        }
    }

    #[test]
    fn embedding_image_of_generator_is_root() {
        let f4 = FieldDesc::new(2, 2).unwrap();
        let f16 = FieldDesc::new(2, 4).unwrap();
        let e = Embedding::new(&f4, &f16).unwrap();
        let t = e.embed(f4.from_coeffs(&[0, 1]).unwrap()).unwrap().value();
        assert_eq!(f16.eval_univariate_raw(&[1, 1, 1], t), 0);
        assert!(matches!(Embedding::new(&f4, &FieldDesc::new(2, 3).unwrap()), Err(GfError::NotASubfield { .. })));
    }

    #[test]
    fn parse_field_text() {
        let f: FieldDesc = "3^2".parse().unwrap();
        assert_eq!((f.p(), f.s()), (3, 2));
        let g: FieldDesc = "2^1".parse().unwrap();
        assert_eq!(g.q(), 2);
        assert!("x^2".parse::<FieldDesc>().is_err());
        assert!("6^1".parse::<FieldDesc>().is_err());
    }
}
