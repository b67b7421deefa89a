//! Buchberger's algorithm over `F_q` in grevlex order.
//!
//! The only question the rest of the crate asks is whether `1` lies in an
//! ideal, so the engine returns as soon as any reduction produces a nonzero
//! constant. Pairs are selected by the normal strategy (smallest lcm first)
//! and pruned with the Gebauer–Möller installation of Buchberger's product
//! and chain criteria.

use std::cmp::Ordering;

use thiserror::Error;

use crate::gf::FieldDesc;
use crate::mpoly::poly::{self, Term};
use crate::mpoly::{Monomial, MAX_EXPONENT};

pub use crate::mpoly::AffinePoly;

/// Default number of S-pair reductions before giving up.
pub const DEFAULT_PAIR_BUDGET: u64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroebnerError {
    #[error("pair budget of {0} reductions exhausted")]
    BudgetExhausted(u64),
    #[error("intermediate degree exceeds {MAX_EXPONENT}")]
    DegreeOverflow,
    #[error("exponent vectors have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("generators live in different rings")]
    RingMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroebnerConfig {
    pub pair_budget: u64,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        Self { pair_budget: DEFAULT_PAIR_BUDGET }
    }
}

/// Graded reverse lexicographic comparison of explicit exponent vectors.
pub fn grevlex_compare(a: &[u32], b: &[u32]) -> Result<Ordering, GroebnerError> {
    if a.len() != b.len() {
        return Err(GroebnerError::LengthMismatch(a.len(), b.len()));
    }
    let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
    if da != db {
        return Ok(da.cmp(&db));
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return Ok(b[i].cmp(&a[i]));
        }
    }
    Ok(Ordering::Equal)
}

/// Generators of an ideal in a common polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealBasis {
    field: FieldDesc,
    nvars: usize,
    gens: Vec<AffinePoly>,
}

impl IdealBasis {
    pub fn new(field: &FieldDesc, nvars: usize, gens: Vec<AffinePoly>) -> Result<Self, GroebnerError> {
        if gens.iter().any(|g| g.field() != field || g.nvars() != nvars) {
            return Err(GroebnerError::RingMismatch);
        }
        Ok(Self { field: field.clone(), nvars, gens })
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gens(&self) -> &[AffinePoly] {
        &self.gens
    }

    /// True if some generator is a nonzero constant.
    pub fn contains_unit(&self) -> bool {
        self.gens.iter().any(AffinePoly::is_unit)
    }
}

/// Division remainder of `f` by the basis elements (in their given order).
///
/// No term of the result is divisible by a leading monomial of the basis.
pub fn reduce(f: &AffinePoly, basis: &IdealBasis) -> AffinePoly {
    let field = basis.field();
    let divisors: Vec<(Monomial, u32, &[Term])> = basis
        .gens()
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| (g.terms()[0].0, field.inv_raw(g.terms()[0].1), g.terms()))
        .collect();
    AffinePoly::from_sorted(field, f.nvars(), reduce_terms(field, f.terms().to_vec(), &divisors))
}

fn reduce_terms(field: &FieldDesc, mut f: Vec<Term>, divisors: &[(Monomial, u32, &[Term])]) -> Vec<Term> {
    let mut rem: Vec<Term> = Vec::new();
    let mut start = 0;
    while start < f.len() {
        let (m, c) = f[start];
        match divisors.iter().find(|d| d.0.divides(m)) {
            Some(&(lm, lc_inv, g)) => {
                let factor = field.neg_raw(field.mul_raw(c, lc_inv));
                f = poly::axpy(field, &f[start..], factor, lm.quotient_of(m), g);
                start = 0;
            }
            None => {
                rem.push((m, c));
                start += 1;
            }
        }
    }
    rem
}

/// Result of a Buchberger run that may stop early.
enum Outcome {
    Unit,
    Basis(Vec<Vec<Term>>),
}

struct Engine<'a> {
    field: &'a FieldDesc,
    polys: Vec<Vec<Term>>,
    /// Indices of the current basis `G`.
    basis: Vec<usize>,
    pairs: Vec<(Monomial, usize, usize)>,
    processed: u64,
    budget: u64,
}

impl<'a> Engine<'a> {
    fn new(field: &'a FieldDesc, budget: u64) -> Self {
        Self { field, polys: Vec::new(), basis: Vec::new(), pairs: Vec::new(), processed: 0, budget }
    }

    fn lm(&self, i: usize) -> Monomial {
        self.polys[i][0].0
    }

    /// Full reduction by the current basis. Every basis element is monic.
    fn reduce(&self, f: Vec<Term>) -> Vec<Term> {
        let field = self.field;
        let mut f = f;
        let mut rem: Vec<Term> = Vec::new();
        let mut start = 0;
        while start < f.len() {
            let (m, c) = f[start];
            match self.basis.iter().find(|&&g| self.polys[g][0].0.divides(m)) {
                Some(&g) => {
                    let lm = self.polys[g][0].0;
                    f = poly::axpy(field, &f[start..], field.neg_raw(c), lm.quotient_of(m), &self.polys[g]);
                    start = 0;
                }
                None => {
                    rem.push((m, c));
                    start += 1;
                }
            }
        }
        rem
    }

    fn make_monic(&self, f: &mut [Term]) {
        let inv = self.field.inv_raw(f[0].1);
        if inv != 1 {
            for t in f.iter_mut() {
                t.1 = self.field.mul_raw(t.1, inv);
            }
        }
    }

    /// Adds a reduced, monic, nonconstant polynomial with Gebauer–Möller
    /// pair management.
    fn install(&mut self, f: Vec<Term>) {
        let h = self.polys.len();
        self.polys.push(f);
        let lh = self.lm(h);

        let candidates: Vec<(usize, Monomial)> = self.basis.iter().map(|&g| (g, self.lm(g).lcm(lh))).collect();
        let mut kept: Vec<(usize, Monomial)> = Vec::new();
        for (idx, &(g1, l1)) in candidates.iter().enumerate() {
            let coprime = self.lm(g1).gcd_is_one(lh);
            let dominated = candidates[idx + 1..].iter().any(|&(_, l2)| l2.divides(l1))
                || kept.iter().any(|&(_, l2)| l2.divides(l1));
            if coprime || !dominated {
                kept.push((g1, l1));
            }
        }
        let new_pairs: Vec<(Monomial, usize, usize)> = kept
            .into_iter()
            .filter(|&(g, _)| !self.lm(g).gcd_is_one(lh))
            .map(|(g, l)| (l, g, h))
            .collect();

        let polys = &self.polys;
        let lm = |i: usize| polys[i][0].0;
        self.pairs.retain(|&(l12, g1, g2)| {
            !lh.divides(l12) || lm(g1).lcm(lh) == l12 || lh.lcm(lm(g2)) == l12
        });
        self.pairs.extend(new_pairs);
        self.basis.retain(|&g| !lh.divides(polys[g][0].0));
        self.basis.push(h);
    }

    fn spoly(&self, lcm: Monomial, i: usize, j: usize) -> Vec<Term> {
        let (fi, fj) = (&self.polys[i], &self.polys[j]);
        let ui = fi[0].0.quotient_of(lcm);
        let uj = fj[0].0.quotient_of(lcm);
        let left = poly::axpy(self.field, &[], 1, ui, &fi[1..]);
        poly::axpy(self.field, &left, self.field.neg_raw(1), uj, &fj[1..])
    }

    fn run(mut self, gens: Vec<Vec<Term>>, early_exit: bool) -> Result<Outcome, GroebnerError> {
        let mut gens: Vec<Vec<Term>> = gens.into_iter().filter(|g| !g.is_empty()).collect();
        gens.sort_by(|a, b| a[0].0.cmp(&b[0].0));
        for g in gens {
            if let Some(out) = self.add_reduced(g, early_exit)? {
                return Ok(out);
            }
        }
        while !self.pairs.is_empty() {
            let pos = (0..self.pairs.len())
                .min_by(|&a, &b| {
                    let (pa, pb) = (self.pairs[a], self.pairs[b]);
                    pa.0.cmp(&pb.0).then(pa.1.cmp(&pb.1)).then(pa.2.cmp(&pb.2))
                })
                .expect("pairs is nonempty");
            let (lcm, i, j) = self.pairs.swap_remove(pos);
            self.processed += 1;
            if self.processed > self.budget {
                return Err(GroebnerError::BudgetExhausted(self.budget));
            }
            if lcm.degree() > MAX_EXPONENT {
                return Err(GroebnerError::DegreeOverflow);
            }
            let s = self.spoly(lcm, i, j);
            if let Some(out) = self.add_reduced(s, early_exit)? {
                return Ok(out);
            }
        }
        Ok(Outcome::Basis(self.reduced_basis()))
    }

    fn add_reduced(&mut self, f: Vec<Term>, early_exit: bool) -> Result<Option<Outcome>, GroebnerError> {
        let mut h = self.reduce(f);
        if h.is_empty() {
            return Ok(None);
        }
        if h[0].0 == Monomial::ONE {
            if early_exit {
                return Ok(Some(Outcome::Unit));
            }
            return Ok(Some(Outcome::Basis(vec![vec![(Monomial::ONE, 1)]])));
        }
        self.make_monic(&mut h);
        self.install(h);
        Ok(None)
    }

    fn reduced_basis(&self) -> Vec<Vec<Term>> {
        let mut basis = self.basis.clone();
        basis.sort_by_key(|&a| self.lm(a));
        let mut out = Vec::with_capacity(basis.len());
        for (k, &g) in basis.iter().enumerate() {
            let others: Vec<(Monomial, u32, &[Term])> = basis
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, &o)| (self.lm(o), 1, &self.polys[o][..]))
                .collect();
            let tail = reduce_terms(self.field, self.polys[g][1..].to_vec(), &others);
            let mut full = Vec::with_capacity(tail.len() + 1);
            full.push(self.polys[g][0]);
            full.extend(tail);
            out.push(full);
        }
        out
    }
}

/// Reduced Groebner basis with the default pair budget.
pub fn buchberger(gens: &IdealBasis) -> Result<IdealBasis, GroebnerError> {
    buchberger_with(gens, &GroebnerConfig::default())
}

/// Reduced Groebner basis: monic, sorted by leading monomial, no leading
/// monomial dividing another, tails fully reduced. The unit ideal yields `{1}`.
pub fn buchberger_with(gens: &IdealBasis, config: &GroebnerConfig) -> Result<IdealBasis, GroebnerError> {
    let field = gens.field();
    let nvars = gens.nvars();
    let engine = Engine::new(field, config.pair_budget);
    let raw = gens.gens().iter().map(|g| g.terms().to_vec()).collect();
    let polys = match engine.run(raw, false)? {
        Outcome::Unit => vec![vec![(Monomial::ONE, 1)]],
        Outcome::Basis(b) => b,
    };
    let out = polys.into_iter().map(|t| AffinePoly::from_sorted(field, nvars, t)).collect();
    IdealBasis::new(field, nvars, out)
}

/// Whether `1` lies in the ideal, i.e. the generators have no common zero
/// over the algebraic closure.
pub fn ideal_is_trivial(gens: &IdealBasis) -> Result<bool, GroebnerError> {
    ideal_is_trivial_with(gens, &GroebnerConfig::default())
}

pub fn ideal_is_trivial_with(gens: &IdealBasis, config: &GroebnerConfig) -> Result<bool, GroebnerError> {
    if gens.contains_unit() {
        return Ok(true);
    }
    let engine = Engine::new(gens.field(), config.pair_budget);
    let raw = gens.gens().iter().map(|g| g.terms().to_vec()).collect();
    Ok(matches!(engine.run(raw, true)?, Outcome::Unit))
}

/// Triviality test on raw term lists, used by the smoothness oracle.
pub(crate) fn terms_generate_unit(field: &FieldDesc, gens: Vec<Vec<Term>>, config: &GroebnerConfig) -> Result<bool, GroebnerError> {
    if gens.iter().any(|g| g.len() == 1 && g[0].0 == Monomial::ONE) {
        return Ok(true);
    }
    let engine = Engine::new(field, config.pair_budget);
    Ok(matches!(engine.run(gens, true)?, Outcome::Unit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Embedding;

    fn ring(p: u64, s: u32) -> FieldDesc {
        FieldDesc::new(p, s).unwrap()
    }

    fn ideal(field: &FieldDesc, nvars: usize, gens: &[&str]) -> IdealBasis {
        let gens = gens.iter().map(|g| AffinePoly::parse(field, nvars, g).unwrap()).collect();
        IdealBasis::new(field, nvars, gens).unwrap()
    }

    fn spoly_reduces_to_zero(b: &IdealBasis) -> bool {
        let f = b.field();
        let g = b.gens();
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                let (li, lj) = (g[i].terms()[0], g[j].terms()[0]);
                let l = li.0.lcm(lj.0);
                let a = poly::axpy(f, &[], f.inv_raw(li.1), li.0.quotient_of(l), g[i].terms());
                let s = poly::axpy(f, &a, f.neg_raw(f.inv_raw(lj.1)), lj.0.quotient_of(l), g[j].terms());
                if !reduce(&AffinePoly::from_sorted(f, b.nvars(), s), b).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn grevlex_compare_examples() {
        assert_eq!(grevlex_compare(&[2, 0], &[0, 1]).unwrap(), Ordering::Greater);
        assert_eq!(grevlex_compare(&[1, 0, 1], &[0, 2, 0]).unwrap(), Ordering::Less);
        assert_eq!(grevlex_compare(&[1, 1], &[1, 1]).unwrap(), Ordering::Equal);
        assert!(grevlex_compare(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn reduce_examples() {
        let f2 = ring(2, 1);
        let b = ideal(&f2, 2, &["y0^2"]);
        assert!(reduce(&AffinePoly::parse(&f2, 2, "y0^2*y1").unwrap(), &b).is_zero());
        let b = ideal(&f2, 2, &["y1"]);
        let f = AffinePoly::parse(&f2, 2, "y0 + 1").unwrap();
        assert_eq!(reduce(&f, &b), f);
        let f3 = ring(3, 1);
        let b = ideal(&f3, 2, &["y0^2 + 2*y1"]);
        let r = reduce(&AffinePoly::parse(&f3, 2, "y0^2 + y1").unwrap(), &b);
        assert_eq!(r, AffinePoly::parse(&f3, 2, "2*y1").unwrap());
    }

    #[test]
    fn reduce_is_idempotent() {
        let f3 = ring(3, 1);
        let b = ideal(&f3, 2, &["y0^2 + 2*y1", "y0*y1 + 1"]);
        let f = AffinePoly::parse(&f3, 2, "y0^3*y1 + 2*y1^2 + y0 + 1").unwrap();
        let r = reduce(&f, &b);
        assert_eq!(reduce(&r, &b), r);
    }

    #[test]
    fn buchberger_examples() {
        let f2 = ring(2, 1);
        let b = buchberger(&ideal(&f2, 2, &["y0", "y1"])).unwrap();
        assert_eq!(b.gens().len(), 2);
        assert!(!b.contains_unit());

        let f5 = ring(5, 1);
        let b = buchberger(&ideal(&f5, 2, &["y0*y1 + 4", "y0^2"])).unwrap();
        assert_eq!(b.gens(), &[AffinePoly::constant(&f5, 2, 1)]);

        let b = buchberger(&ideal(&f5, 2, &["y0^2 + 4*y1", "y1^2"])).unwrap();
        assert!(!b.contains_unit());
        assert!(spoly_reduces_to_zero(&b));
    }

    #[test]
    fn triviality_examples() {
        let f2 = ring(2, 1);
        assert!(ideal_is_trivial(&ideal(&f2, 2, &["1"])).unwrap());
        assert!(ideal_is_trivial(&ideal(&f2, 2, &["y0", "y1", "y0 + y1 + 1"])).unwrap());
        assert!(!ideal_is_trivial(&ideal(&f2, 2, &["y0^2", "y1"])).unwrap());
        assert!(!ideal_is_trivial(&ideal(&f2, 2, &[])).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let f3 = ring(3, 1);
        let i = ideal(&f3, 3, &["y0^2 + y1 + 2", "y0*y1 + y2", "y1^2 + 2*y0*y2 + 1"]);
        let cfg = GroebnerConfig { pair_budget: 1 };
        assert_eq!(buchberger_with(&i, &cfg), Err(GroebnerError::BudgetExhausted(1)));
        // coprime leading monomials form no pairs, so nothing is spent
        let coprime = ideal(&f3, 3, &["y0^3 + y1*y2 + 1", "y1^3 + y0*y2 + 2", "y2^3 + y0*y1"]);
        assert!(buchberger_with(&coprime, &GroebnerConfig { pair_budget: 0 }).is_ok());
    }

    #[test]
    fn output_is_independent_of_generator_order() {
        let f3 = ring(3, 1);
        let gens = ["y0^2 + y1 + 2", "y0*y1 + y2", "y1^2 + 2*y0*y2 + 1"];
        let base = buchberger(&ideal(&f3, 3, &gens)).unwrap();
        assert!(spoly_reduces_to_zero(&base));
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let permuted: Vec<&str> = p.iter().map(|&i| gens[i]).collect();
            assert_eq!(buchberger(&ideal(&f3, 3, &permuted)).unwrap(), base);
        }
        // generators still reduce to zero
        for g in gens {
            assert!(reduce(&AffinePoly::parse(&f3, 3, g).unwrap(), &base).is_zero());
        }
    }

    #[test]
    fn reduced_basis_shape() {
        let f5 = ring(5, 1);
        let b = buchberger(&ideal(&f5, 2, &["2*y0^2 + y1", "3*y0*y1 + y0", "y1^3"])).unwrap();
        let lms: Vec<Monomial> = b.gens().iter().map(|g| g.leading_monomial().unwrap()).collect();
        for g in b.gens() {
            assert_eq!(g.terms()[0].1, 1);
            for &(m, _) in &g.terms()[1..] {
                assert!(lms.iter().all(|l| !l.divides(m)));
            }
        }
        for (i, a) in lms.iter().enumerate() {
            for (j, c) in lms.iter().enumerate() {
                assert!(i == j || !a.divides(*c));
            }
        }
    }

    /// Exhaustive check over extension fields that a trivial ideal has no
    /// common zero, for a few curated ideals.
    #[test]
    fn triviality_is_sound_against_point_scan() {
        let f2 = ring(2, 1);
        let cases = [
            vec!["y0^2 + y0 + 1", "y1"],
            vec!["y0*y1 + 1", "y0 + y1"],
            vec!["y0^3 + y1^2 + 1", "y0^2*y1 + y1 + 1", "y0 + 1"],
            vec!["y0^2 + y1", "y1^2 + y0 + 1"],
            vec!["y0 + 1", "y0"],
        ];
        for gens in cases {
            let i = ideal(&f2, 2, &gens);
            let trivial = ideal_is_trivial(&i).unwrap();
            let mut found_zero = false;
            for e in 1..=6 {
                let ext = ring(2, e);
                let emb = Embedding::new(&f2, &ext).unwrap();
                for a in 0..ext.q() {
                    for b in 0..ext.q() {
                        if i.gens().iter().all(|g| g.evaluate_raw(&emb, &[a, b]) == 0) {
                            found_zero = true;
                        }
                    }
                }
            }
            if trivial {
                assert!(!found_zero, "{gens:?}");
            }
        }
    }
}
