//! Homogeneous forms over a finite field and their affine charts.

pub mod monomial;
pub mod poly;

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::gf::{Embedding, FieldDesc, FieldElem, GfError};
pub use monomial::{monomials_of_degree, Monomial, MAX_EXPONENT, MAX_VARS};
use poly::Term;

/// Default cap on the number of forms `enumerate_forms` will produce.
pub const DEFAULT_FORM_BOUND: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("at most {MAX_VARS} variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error("degree {0} exceeds the supported maximum {MAX_EXPONENT}")]
    DegreeTooLarge(u32),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(u32),
    #[error("cannot differentiate a constant form")]
    ConstantForm,
    #[error("forms live over different rings")]
    RingMismatch,
    #[error("form degrees must be ascending, got {0:?}")]
    UnsortedDegrees(Vec<u32>),
    #[error("{count} forms exceed the enumeration bound {bound}")]
    BoundExceeded { count: String, bound: u64 },
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

fn check_nvars(nvars: usize) -> Result<(), PolyError> {
    if nvars > MAX_VARS {
        return Err(PolyError::TooManyVariables(nvars));
    }
    Ok(())
}

/// A homogeneous polynomial of fixed degree in `nvars` variables.
///
/// The degree is part of the value, so the zero form of degree 3 differs
/// from the zero form of degree 2.
#[derive(Clone, PartialEq, Eq)]
pub struct Form {
    field: FieldDesc,
    nvars: usize,
    degree: u32,
    terms: Vec<Term>,
}

impl Form {
    pub fn zero(field: &FieldDesc, nvars: usize, degree: u32) -> Result<Self, PolyError> {
        check_nvars(nvars)?;
        if degree > MAX_EXPONENT {
            return Err(PolyError::DegreeTooLarge(degree));
        }
        Ok(Self { field: field.clone(), nvars, degree, terms: Vec::new() })
    }

    /// Builds a form from `(exponents, coefficient)` pairs; coefficients are
    /// element indices of `field`.
    pub fn from_terms(field: &FieldDesc, nvars: usize, degree: u32, terms: &[(Vec<u32>, u32)]) -> Result<Self, PolyError> {
        check_nvars(nvars)?;
        let mut packed = Vec::with_capacity(terms.len());
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(PolyError::DimensionMismatch { expected: nvars, got: exps.len() });
            }
            if exps.iter().sum::<u32>() != degree {
                return Err(PolyError::NotHomogeneous(degree));
            }
            let m = Monomial::new(exps).ok_or(PolyError::DegreeTooLarge(degree))?;
            field.elem(*c)?;
            packed.push((m, *c));
        }
        Self::from_packed(field, nvars, degree, packed)
    }

    pub(crate) fn from_packed(field: &FieldDesc, nvars: usize, degree: u32, terms: Vec<Term>) -> Result<Self, PolyError> {
        check_nvars(nvars)?;
        if degree > MAX_EXPONENT {
            return Err(PolyError::DegreeTooLarge(degree));
        }
        if terms.iter().any(|(m, _)| m.degree() != degree) {
            return Err(PolyError::NotHomogeneous(degree));
        }
        Ok(Self { field: field.clone(), nvars, degree, terms: poly::normalize(field, terms) })
    }

    /// The variable `x_i` as a linear form.
    pub fn variable(field: &FieldDesc, nvars: usize, i: usize) -> Result<Self, PolyError> {
        if i >= nvars {
            return Err(PolyError::VariableOutOfRange { index: i, nvars });
        }
        Self::from_packed(field, nvars, 1, vec![(Monomial::var(i), 1)])
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Terms as `(exponent vector, coefficient)`, grevlex descending.
    pub fn term_list(&self) -> Vec<(Vec<u32>, FieldElem)> {
        self.terms
            .iter()
            .map(|&(m, c)| (m.exponents(self.nvars), self.field.elem(c).expect("stored coefficient is valid")))
            .collect()
    }

    /// Number of monomials of degree `degree` in `nvars` variables.
    pub fn monomial_count(nvars: usize, degree: u32) -> u64 {
        binomial(nvars as u64 - 1 + degree as u64, degree as u64)
    }

    pub fn scale(&self, c: u32) -> Form {
        Form { terms: poly::scale(&self.field, &self.terms, c), ..self.clone() }
    }

    pub fn add(&self, other: &Form) -> Result<Form, PolyError> {
        self.same_ring(other)?;
        if self.degree != other.degree {
            return Err(PolyError::NotHomogeneous(self.degree));
        }
        Ok(Form { terms: poly::add(&self.field, &self.terms, &other.terms), ..self.clone() })
    }

    pub fn mul(&self, other: &Form) -> Result<Form, PolyError> {
        self.same_ring(other)?;
        let degree = self.degree + other.degree;
        if degree > MAX_EXPONENT {
            return Err(PolyError::DegreeTooLarge(degree));
        }
        Ok(Form { degree, terms: poly::mul(&self.field, &self.terms, &other.terms), ..self.clone() })
    }

    fn same_ring(&self, other: &Form) -> Result<(), PolyError> {
        if self.field != other.field || self.nvars != other.nvars {
            return Err(PolyError::RingMismatch);
        }
        Ok(())
    }

    /// `∂f/∂x_i`, a form of degree `d - 1`. Exponents are reduced mod p, so
    /// `∂(x^p)/∂x = 0`.
    pub fn partial_derivative(&self, i: usize) -> Result<Form, PolyError> {
        if i >= self.nvars {
            return Err(PolyError::VariableOutOfRange { index: i, nvars: self.nvars });
        }
        if self.degree == 0 {
            return Err(PolyError::ConstantForm);
        }
        Ok(Form {
            field: self.field.clone(),
            nvars: self.nvars,
            degree: self.degree - 1,
            terms: poly::derivative(&self.field, &self.terms, i),
        })
    }

    pub fn gradient(&self) -> Result<Vec<Form>, PolyError> {
        (0..self.nvars).map(|i| self.partial_derivative(i)).collect()
    }

    /// Value at a point with coordinates in the target of `embedding`.
    pub fn evaluate(&self, embedding: &Embedding, point: &[FieldElem]) -> Result<FieldElem, PolyError> {
        if embedding.source() != &self.field {
            return Err(PolyError::RingMismatch);
        }
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        let target = embedding.target();
        let coords = point
            .iter()
            .map(|&x| if x.field_id() == target.id() { Ok(x.value()) } else { Err(PolyError::RingMismatch) })
            .collect::<Result<Vec<u32>, _>>()?;
        Ok(target.elem(self.evaluate_raw(embedding, &coords))?)
    }

    /// Evaluation on raw coordinates of the embedding target.
    pub fn evaluate_raw(&self, embedding: &Embedding, point: &[u32]) -> u32 {
        poly::evaluate_with(embedding.target(), &self.terms, |c| embedding.embed_raw(c), point)
    }

    /// Substitutes `x_c = 1`; the remaining variables keep their relative order.
    pub fn dehomogenize(&self, c: usize) -> Result<AffinePoly, PolyError> {
        if c >= self.nvars {
            return Err(PolyError::VariableOutOfRange { index: c, nvars: self.nvars });
        }
        let terms = self.terms.iter().map(|&(m, coef)| (m.remove_var(c), coef)).collect();
        Ok(AffinePoly::from_packed(&self.field, self.nvars - 1, terms))
    }

    /// Parses the text format (`"1*x0^2*x1 + 1*x2^3"`); the degree is read off
    /// the terms, so the zero form needs [`Form::parse_with_degree`].
    pub fn parse(field: &FieldDesc, nvars: usize, text: &str) -> Result<Form, PolyError> {
        let terms = parse_terms(field, nvars, text)?;
        let degree = terms.first().map(|(m, _)| m.degree()).ok_or_else(|| {
            PolyError::Parse("the zero form has no implied degree".to_string())
        })?;
        Self::from_packed(field, nvars, degree, terms)
    }

    pub fn parse_with_degree(field: &FieldDesc, nvars: usize, degree: u32, text: &str) -> Result<Form, PolyError> {
        let terms = parse_terms(field, nvars, text)?;
        Self::from_packed(field, nvars, degree, terms)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.field, &self.terms, self.nvars, "x")
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(deg {}, {})", self.degree, self)
    }
}

/// `random_form`: every coefficient of the `C(n+d, d)` monomials is drawn
/// independently and uniformly, in canonical monomial order.
pub fn random_form<R: Rng + ?Sized>(field: &FieldDesc, nvars: usize, degree: u32, rng: &mut R) -> Result<Form, PolyError> {
    check_nvars(nvars)?;
    if degree > MAX_EXPONENT {
        return Err(PolyError::DegreeTooLarge(degree));
    }
    let q = field.q();
    let terms = monomials_of_degree(nvars, degree).into_iter().map(|m| (m, rng.gen_range(0..q))).collect();
    Form::from_packed(field, nvars, degree, terms)
}

/// Enumerates all of `S_d` in canonical order: the form with index `t` has
/// coefficient `digit_j(t)` (base q) on the `j`-th monomial of
/// [`monomials_of_degree`], so index 0 is the zero form.
pub fn enumerate_forms(field: &FieldDesc, nvars: usize, degree: u32) -> Result<FormEnumerator, PolyError> {
    FormEnumerator::new(field, nvars, degree, DEFAULT_FORM_BOUND)
}

pub struct FormEnumerator {
    field: FieldDesc,
    nvars: usize,
    degree: u32,
    monomials: Vec<Monomial>,
    next: u64,
    total: u64,
}

impl FormEnumerator {
    pub fn new(field: &FieldDesc, nvars: usize, degree: u32, bound: u64) -> Result<Self, PolyError> {
        check_nvars(nvars)?;
        if degree > MAX_EXPONENT {
            return Err(PolyError::DegreeTooLarge(degree));
        }
        let monomials = monomials_of_degree(nvars, degree);
        let total = (field.q() as u64)
            .checked_pow(monomials.len() as u32)
            .filter(|&t| t <= bound)
            .ok_or_else(|| PolyError::BoundExceeded {
                count: format!("{}^{}", field.q(), monomials.len()),
                bound,
            })?;
        Ok(Self { field: field.clone(), nvars, degree, monomials, next: 0, total })
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// The form at position `index` of the canonical order.
    pub fn nth_form(&self, index: u64) -> Form {
        form_from_index(&self.field, self.nvars, self.degree, &self.monomials, index)
    }
}

impl Iterator for FormEnumerator {
    type Item = Form;

    fn next(&mut self) -> Option<Form> {
        if self.next >= self.total {
            return None;
        }
        let f = self.nth_form(self.next);
        self.next += 1;
        Some(f)
    }
}

pub(crate) fn form_from_index(field: &FieldDesc, nvars: usize, degree: u32, monomials: &[Monomial], mut index: u64) -> Form {
    let q = field.q() as u64;
    let mut terms = Vec::new();
    for &m in monomials {
        let c = (index % q) as u32;
        index /= q;
        if c != 0 {
            terms.push((m, c));
        }
    }
    Form::from_packed(field, nvars, degree, terms).expect("canonical monomials are homogeneous")
}

/// A tuple of forms over a common ring with ascending degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormTuple {
    forms: Vec<Form>,
}

impl FormTuple {
    pub fn new(forms: Vec<Form>) -> Result<Self, PolyError> {
        if let Some(first) = forms.first() {
            if forms.iter().any(|f| f.field != first.field || f.nvars != first.nvars) {
                return Err(PolyError::RingMismatch);
            }
        }
        let degrees: Vec<u32> = forms.iter().map(Form::degree).collect();
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(PolyError::UnsortedDegrees(degrees));
        }
        Ok(Self { forms })
    }

    /// Stable-sorts by degree before validating.
    pub fn sorted(mut forms: Vec<Form>) -> Result<Self, PolyError> {
        forms.sort_by_key(Form::degree);
        Self::new(forms)
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.forms.iter().map(Form::degree).collect()
    }

    /// Entry `(i, j)` is `∂f_i/∂x_j`.
    pub fn jacobian(&self) -> Result<Vec<Vec<Form>>, PolyError> {
        self.forms.iter().map(Form::gradient).collect()
    }
}

/// A (not necessarily homogeneous) polynomial in `nvars` variables.
#[derive(Clone, PartialEq, Eq)]
pub struct AffinePoly {
    field: FieldDesc,
    nvars: usize,
    terms: Vec<Term>,
}

impl AffinePoly {
    pub fn zero(field: &FieldDesc, nvars: usize) -> Self {
        Self { field: field.clone(), nvars, terms: Vec::new() }
    }

    pub fn constant(field: &FieldDesc, nvars: usize, c: u32) -> Self {
        Self::from_packed(field, nvars, vec![(Monomial::ONE, c)])
    }

    pub fn from_terms(field: &FieldDesc, nvars: usize, terms: &[(Vec<u32>, u32)]) -> Result<Self, PolyError> {
        check_nvars(nvars)?;
        let mut packed = Vec::with_capacity(terms.len());
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(PolyError::DimensionMismatch { expected: nvars, got: exps.len() });
            }
            let m = Monomial::new(exps).ok_or(PolyError::DegreeTooLarge(exps.iter().sum()))?;
            field.elem(*c)?;
            packed.push((m, *c));
        }
        Ok(Self::from_packed(field, nvars, packed))
    }

    pub(crate) fn from_packed(field: &FieldDesc, nvars: usize, terms: Vec<Term>) -> Self {
        Self { field: field.clone(), nvars, terms: poly::normalize(field, terms) }
    }

    /// Wraps terms that are already normalized.
    pub(crate) fn from_sorted(field: &FieldDesc, nvars: usize, terms: Vec<Term>) -> Self {
        Self { field: field.clone(), nvars, terms }
    }

    /// Parses the text format with variables `y0, y1, ...` (or `x0, ...`).
    pub fn parse(field: &FieldDesc, nvars: usize, text: &str) -> Result<Self, PolyError> {
        Ok(Self::from_packed(field, nvars, parse_terms(field, nvars, text)?))
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero constant.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == Monomial::ONE
    }

    pub fn leading_monomial(&self) -> Option<Monomial> {
        self.terms.first().map(|t| t.0)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.0.degree()).max()
    }

    pub fn evaluate_raw(&self, embedding: &Embedding, point: &[u32]) -> u32 {
        poly::evaluate_with(embedding.target(), &self.terms, |c| embedding.embed_raw(c), point)
    }

    pub fn add(&self, other: &AffinePoly) -> AffinePoly {
        Self::from_sorted(&self.field, self.nvars, poly::add(&self.field, &self.terms, &other.terms))
    }

    pub fn mul(&self, other: &AffinePoly) -> AffinePoly {
        Self::from_sorted(&self.field, self.nvars, poly::mul(&self.field, &self.terms, &other.terms))
    }

    pub fn scale(&self, c: u32) -> AffinePoly {
        Self::from_sorted(&self.field, self.nvars, poly::scale(&self.field, &self.terms, c))
    }
}

impl fmt::Display for AffinePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.field, &self.terms, self.nvars, "y")
    }
}

impl fmt::Debug for AffinePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffinePoly({self})")
    }
}

fn write_coeff(f: &mut fmt::Formatter<'_>, field: &FieldDesc, c: u32) -> fmt::Result {
    if field.is_prime_field() {
        write!(f, "{c}")
    } else {
        let coeffs = field.coeffs_raw(c);
        write!(f, "[")?;
        for (i, x) in coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, field: &FieldDesc, terms: &[Term], nvars: usize, var: &str) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, &(m, c)) in terms.iter().enumerate() {
        if k > 0 {
            write!(f, " + ")?;
        }
        write_coeff(f, field, c)?;
        for i in 0..nvars {
            match m.exponent(i) {
                0 => {}
                1 => write!(f, "*{var}{i}")?,
                e => write!(f, "*{var}{i}^{e}")?,
            }
        }
    }
    Ok(())
}

fn parse_terms(field: &FieldDesc, nvars: usize, text: &str) -> Result<Vec<Term>, PolyError> {
    check_nvars(nvars)?;
    let bad = |msg: String| PolyError::Parse(msg);
    let text = text.trim();
    if text == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for raw_term in text.split('+') {
        let raw_term = raw_term.trim();
        if raw_term.is_empty() {
            return Err(bad(format!("empty term in {text:?}")));
        }
        let mut coeff = 1u32;
        let mut exps = vec![0u32; nvars];
        for (pos, factor) in raw_term.split('*').map(str::trim).enumerate() {
            if let Some(inner) = factor.strip_prefix('[') {
                let inner = inner.strip_suffix(']').ok_or_else(|| bad(format!("unclosed coefficient {factor:?}")))?;
                let digits = inner
                    .split(',')
                    .map(|d| d.trim().parse::<u32>().map_err(|_| bad(format!("bad coefficient digit in {factor:?}"))))
                    .collect::<Result<Vec<u32>, _>>()?;
                let digits: Vec<u32> = digits.into_iter().map(|d| d % field.p()).collect();
                coeff = field.mul_raw(coeff, field.from_coeffs(&digits)?.value());
            } else if factor.starts_with(|c: char| c.is_ascii_digit()) {
                if pos != 0 {
                    return Err(bad(format!("coefficient must come first in {raw_term:?}")));
                }
                let c: u64 = factor.parse().map_err(|_| bad(format!("bad coefficient {factor:?}")))?;
                coeff = field.mul_raw(coeff, field.from_int(c));
            } else if let Some(rest) = factor.strip_prefix(['x', 'y']) {
                let (idx, e) = match rest.split_once('^') {
                    Some((i, e)) => (i, e.trim().parse::<u32>().map_err(|_| bad(format!("bad exponent in {factor:?}")))?),
                    None => (rest, 1),
                };
                let idx: usize = idx.trim().parse().map_err(|_| bad(format!("bad variable {factor:?}")))?;
                if idx >= nvars {
                    return Err(PolyError::VariableOutOfRange { index: idx, nvars });
                }
                exps[idx] += e;
            } else {
                return Err(bad(format!("unexpected factor {factor:?}")));
            }
        }
        let m = Monomial::new(&exps).ok_or(PolyError::DegreeTooLarge(exps.iter().sum()))?;
        out.push((m, coeff));
    }
    Ok(out)
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
