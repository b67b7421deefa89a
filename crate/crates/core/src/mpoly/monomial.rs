//! Packed exponent vectors.
//!
//! Byte `i < 7` holds the exponent of variable `i`, byte 7 the total degree.
//! Every byte stays below 128, which lets divisibility be decided with one
//! subtraction and the graded reverse lexicographic order with one integer
//! comparison.

use std::cmp::Ordering;
use std::fmt;

pub const MAX_VARS: usize = 7;
pub const MAX_EXPONENT: u32 = 127;

const EXP_MASK: u64 = 0x00FF_FFFF_FFFF_FFFF;
const HIGH_BITS: u64 = 0x8080_8080_8080_8080;
const REVERSED: u64 = 0x007F_7F7F_7F7F_7F7F;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    /// Builds a monomial; `None` if there are too many variables or the
    /// total degree exceeds [`MAX_EXPONENT`].
    pub fn new(exponents: &[u32]) -> Option<Self> {
        if exponents.len() > MAX_VARS {
            return None;
        }
        let total: u32 = exponents.iter().sum();
        if total > MAX_EXPONENT {
            return None;
        }
        let packed = exponents
            .iter()
            .enumerate()
            .fold((total as u64) << 56, |acc, (i, &e)| acc | ((e as u64) << (8 * i)));
        Some(Monomial(packed))
    }

    pub fn var(i: usize) -> Self {
        assert!(i < MAX_VARS);
        Monomial((1u64 << (8 * i)) | (1u64 << 56))
    }

    #[inline]
    pub fn degree(self) -> u32 {
        (self.0 >> 56) as u32
    }

    #[inline]
    pub fn exponent(self, i: usize) -> u32 {
        ((self.0 >> (8 * i)) & 0xFF) as u32
    }

    pub fn exponents(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exponent(i)).collect()
    }

    /// Product; `None` when the total degree would leave the packed range.
    #[inline]
    pub fn checked_mul(self, other: Monomial) -> Option<Monomial> {
        if self.degree() + other.degree() > MAX_EXPONENT {
            return None;
        }
        Some(Monomial(self.0 + other.0))
    }

    #[inline]
    pub fn mul(self, other: Monomial) -> Monomial {
        self.checked_mul(other).expect("monomial degree overflow")
    }

    #[inline]
    pub fn divides(self, other: Monomial) -> bool {
        ((other.0 | HIGH_BITS).wrapping_sub(self.0) & HIGH_BITS) == HIGH_BITS
    }

    /// `other / self`, assuming `self.divides(other)`.
    #[inline]
    pub fn quotient_of(self, other: Monomial) -> Monomial {
        debug_assert!(self.divides(other));
        Monomial(other.0 - self.0)
    }

    pub fn lcm(self, other: Monomial) -> Monomial {
        let mut packed = 0u64;
        let mut total = 0u64;
        for i in 0..MAX_VARS {
            let e = self.exponent(i).max(other.exponent(i)) as u64;
            total += e;
            packed |= e << (8 * i);
        }
        Monomial(packed | (total.min(255) << 56))
    }

    pub fn gcd_is_one(self, other: Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.exponent(i) == 0 || other.exponent(i) == 0)
    }

    /// Integer key whose natural order is grevlex.
    #[inline]
    fn grevlex_key(self) -> u64 {
        (self.0 & !EXP_MASK) | (REVERSED - (self.0 & EXP_MASK))
    }

    /// Drops variable `c` and shifts the later variables down by one.
    pub fn remove_var(self, c: usize) -> Monomial {
        let low_mask = (1u64 << (8 * c)) - 1;
        let exps = self.0 & EXP_MASK;
        let low = exps & low_mask;
        let high = (exps >> (8 * (c + 1))) << (8 * c);
        let removed = self.exponent(c) as u64;
        Monomial(low | high | ((self.degree() as u64 - removed) << 56))
    }

    /// Inserts variable `c` with exponent `e`, shifting later variables up.
    pub fn insert_var(self, c: usize, e: u32) -> Monomial {
        let low_mask = (1u64 << (8 * c)) - 1;
        let exps = self.0 & EXP_MASK;
        let low = exps & low_mask;
        let high = ((exps & !low_mask) << 8) & EXP_MASK;
        Monomial(low | high | ((e as u64) << (8 * c)) | ((self.degree() + e) as u64) << 56)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.grevlex_key().cmp(&other.grevlex_key())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exponents(MAX_VARS))
    }
}

/// All monomials of total degree `d` in `nvars` variables, grevlex ascending.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(i: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        let n = current.len();
        if i + 1 == n {
            current[i] = left;
            out.push(Monomial::new(current).expect("degree within range"));
            return;
        }
        for e in 0..=left {
            current[i] = e;
            rec(i + 1, left - e, current, out);
        }
    }
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial::ONE);
        }
        return out;
    }
    rec(0, d, &mut current, &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u32]) -> Monomial {
        Monomial::new(e).unwrap()
    }

    #[test]
    fn grevlex_examples() {
        assert!(m(&[2, 0]) > m(&[0, 1]));
        assert!(m(&[0, 2, 0]) > m(&[1, 0, 1]));
        assert_eq!(m(&[1, 2, 3]).cmp(&m(&[1, 2, 3])), Ordering::Equal);
        // x0 > x1 > x2 in degree one
        assert!(m(&[1, 0, 0]) > m(&[0, 1, 0]));
        assert!(m(&[0, 1, 0]) > m(&[0, 0, 1]));
    }

    /// Grevlex compared the textbook way, on explicit vectors.
    fn reference_grevlex(a: &[u32], b: &[u32]) -> Ordering {
        let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
        if da != db {
            return da.cmp(&db);
        }
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        Ordering::Equal
    }

    #[test]
    fn packed_order_matches_reference() {
        let all: Vec<Vec<u32>> = (0..=3).flat_map(|d| monomials_of_degree(3, d)).map(|x| x.exponents(3)).collect();
        for a in &all {
            for b in &all {
                assert_eq!(m(a).cmp(&m(b)), reference_grevlex(a, b), "{a:?} {b:?}");
                let div = a.iter().zip(b).all(|(x, y)| x <= y);
                assert_eq!(m(a).divides(m(b)), div);
            }
        }
    }

    #[test]
    fn remove_and_insert_var() {
        let x = m(&[1, 2, 3]);
        assert_eq!(x.remove_var(0), m(&[2, 3]));
        assert_eq!(x.remove_var(1), m(&[1, 3]));
        assert_eq!(x.remove_var(2), m(&[1, 2]));
        assert_eq!(m(&[2, 3]).insert_var(0, 1), x);
        assert_eq!(m(&[1, 3]).insert_var(1, 2), x);
        assert_eq!(m(&[1, 2]).insert_var(2, 3), x);
    }

    #[test]
    fn lcm_and_quotient() {
        let a = m(&[2, 0, 1]);
        let b = m(&[1, 3, 0]);
        let l = a.lcm(b);
        assert_eq!(l, m(&[2, 3, 1]));
        assert_eq!(a.quotient_of(l), m(&[0, 3, 0]));
        assert!(!a.gcd_is_one(b));
        assert!(m(&[1, 0]).gcd_is_one(m(&[0, 4])));
    }

    #[test]
    fn monomial_counts_are_binomial() {
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(3, 3).len(), 10);
        assert_eq!(monomials_of_degree(4, 3).len(), 20);
        assert_eq!(monomials_of_degree(1, 5).len(), 1);
    }
}
