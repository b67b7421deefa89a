//! Sparse term lists shared by forms and affine polynomials.
//!
//! Terms are kept sorted by grevlex, largest first, with nonzero coefficients.
//! Coefficients are raw element indices of the field passed to each operation.

use std::collections::HashMap;

use super::monomial::Monomial;
use crate::gf::FieldDesc;

pub type Term = (Monomial, u32);

/// Sorts descending and merges equal monomials, dropping zeros.
pub fn normalize(field: &FieldDesc, mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for (m, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 = field.add_raw(last.1, c),
            _ => out.push((m, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    out
}

pub fn add(field: &FieldDesc, a: &[Term], b: &[Term]) -> Vec<Term> {
    axpy(field, a, 1, Monomial::ONE, b)
}

pub fn sub(field: &FieldDesc, a: &[Term], b: &[Term]) -> Vec<Term> {
    axpy(field, a, field.neg_raw(1), Monomial::ONE, b)
}

/// `a + c * mono * b`, by merging the sorted term lists.
pub fn axpy(field: &FieldDesc, a: &[Term], c: u32, mono: Monomial, b: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let bj = b.get(j).map(|&(m, coef)| (mono.mul(m), coef));
        match (a.get(i), bj) {
            (Some(&(ma, ca)), Some((mb, cb))) => {
                if ma > mb {
                    out.push((ma, ca));
                    i += 1;
                } else if mb > ma {
                    out.push((mb, field.mul_raw(c, cb)));
                    j += 1;
                } else {
                    let v = field.add_raw(ca, field.mul_raw(c, cb));
                    if v != 0 {
                        out.push((ma, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some(&t), None) => {
                out.push(t);
                i += 1;
            }
            (None, Some((mb, cb))) => {
                out.push((mb, field.mul_raw(c, cb)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub fn scale(field: &FieldDesc, a: &[Term], c: u32) -> Vec<Term> {
    if c == 0 {
        return Vec::new();
    }
    a.iter().map(|&(m, x)| (m, field.mul_raw(c, x))).collect()
}

pub fn mul(field: &FieldDesc, a: &[Term], b: &[Term]) -> Vec<Term> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc: HashMap<Monomial, u32> = HashMap::with_capacity(a.len() * b.len());
    for &(ma, ca) in a {
        for &(mb, cb) in b {
            let e = acc.entry(ma.mul(mb)).or_insert(0);
            *e = field.add_raw(*e, field.mul_raw(ca, cb));
        }
    }
    normalize(field, acc.into_iter().collect())
}

/// Formal partial derivative with respect to variable `i`.
pub fn derivative(field: &FieldDesc, a: &[Term], i: usize) -> Vec<Term> {
    let var = Monomial::var(i);
    let terms = a
        .iter()
        .filter_map(|&(m, c)| {
            let e = m.exponent(i);
            if e == 0 {
                return None;
            }
            let factor = field.from_int(e as u64);
            let v = field.mul_raw(c, factor);
            (v != 0).then(|| (var.quotient_of(m), v))
        })
        .collect();
    // Dividing every monomial by x_i preserves the order.
    terms
}

/// Evaluates at a point whose coordinates live in `target`, mapping each
/// coefficient through `embed`.
pub fn evaluate_with(target: &FieldDesc, a: &[Term], embed: impl Fn(u32) -> u32, point: &[u32]) -> u32 {
    let mut acc = 0u32;
    for &(m, c) in a {
        let mut v = embed(c);
        for (i, &x) in point.iter().enumerate() {
            let e = m.exponent(i);
            if e > 0 {
                v = target.mul_raw(v, target.pow_raw(x, e as u64));
            }
        }
        acc = target.add_raw(acc, v);
    }
    acc
}

/// Determinant of a square matrix of polynomials by cofactor expansion
/// along the first row.
pub fn determinant(field: &FieldDesc, rows: &[Vec<&[Term]>]) -> Vec<Term> {
    let n = rows.len();
    if n == 0 {
        return vec![(Monomial::ONE, 1)];
    }
    let cols: Vec<usize> = (0..n).collect();
    det_rec(field, rows, 0, &cols)
}

fn det_rec(field: &FieldDesc, rows: &[Vec<&[Term]>], r: usize, cols: &[usize]) -> Vec<Term> {
    if cols.len() == 1 {
        return rows[r][cols[0]].to_vec();
    }
    let mut acc: Vec<Term> = Vec::new();
    for (idx, &c) in cols.iter().enumerate() {
        let entry = rows[r][c];
        if entry.is_empty() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(field, rows, r + 1, &rest);
        if minor.is_empty() {
            continue;
        }
        let prod = mul(field, entry, &minor);
        acc = if idx % 2 == 0 { add(field, &acc, &prod) } else { sub(field, &acc, &prod) };
    }
    acc
}
