//! Smoothness of `H_f ∩ X` by the Jacobian criterion, decided two ways:
//!
//! * [`is_smooth_gb`] is exact. On each standard affine chart it asks whether
//!   the singular-locus ideal (the forms, plus `g` for a hypersurface `X`,
//!   plus all maximal minors of the Jacobian) contains `1`.
//! * [`is_smooth_brute`] scans closed points of degree up to `E` and checks
//!   the rank condition pointwise. It can only refute smoothness.
//!
//! A point not on the intersection counts as smooth, and an empty
//! intersection is smooth.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::gf::{Embedding, FieldDesc, GfError, DEFAULT_FIELD_BOUND};
use crate::groebner::{self, GroebnerConfig, GroebnerError};
use crate::mpoly::poly::{self, Term};
use crate::mpoly::{Form, FormTuple, PolyError};

/// Default cap on the number of projective points enumerated in one call.
pub const DEFAULT_POINT_BOUND: u64 = 1 << 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmoothnessError {
    #[error("number of hypersurfaces k = {k} must lie in 1..={max}")]
    InvalidCodimension { k: usize, max: usize },
    #[error("forms and variety live over different rings")]
    RingMismatch,
    #[error("point is not on the variety")]
    NotOnVariety,
    #[error("point must be rational over the base field")]
    NotRational,
    #[error("the hypersurface defining X is not smooth")]
    SingularAmbient,
    #[error("{0} points exceed the enumeration bound")]
    BoundExceeded(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarietyKind {
    ProjectiveSpace,
    /// A smooth hypersurface `V(g)`.
    Hypersurface(Form),
}

/// The ambient `X`: all of `P^n`, or a smooth hypersurface in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarietyDesc {
    field: FieldDesc,
    nvars: usize,
    kind: VarietyKind,
}

impl VarietyDesc {
    pub fn projective_space(field: &FieldDesc, n: usize) -> Result<Self, SmoothnessError> {
        if n + 1 > crate::mpoly::MAX_VARS {
            return Err(PolyError::TooManyVariables(n + 1).into());
        }
        Ok(Self { field: field.clone(), nvars: n + 1, kind: VarietyKind::ProjectiveSpace })
    }

    /// `X = V(g)`; `g` must itself be a smooth hypersurface section of `P^n`.
    pub fn hypersurface(g: Form) -> Result<Self, SmoothnessError> {
        Self::hypersurface_with(g, &GroebnerConfig::default())
    }

    pub fn hypersurface_with(g: Form, config: &GroebnerConfig) -> Result<Self, SmoothnessError> {
        if g.degree() == 0 || g.nvars() < 2 {
            return Err(SmoothnessError::SingularAmbient);
        }
        let space = Self::projective_space(g.field(), g.nvars() - 1)?;
        let tuple = FormTuple::new(vec![g.clone()])?;
        if !is_smooth_gb_with(&tuple, &space, config)?.smooth {
            return Err(SmoothnessError::SingularAmbient);
        }
        Ok(Self { field: g.field().clone(), nvars: g.nvars(), kind: VarietyKind::Hypersurface(g) })
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Dimension `n` of the ambient projective space.
    pub fn n(&self) -> usize {
        self.nvars - 1
    }

    /// Dimension of `X`.
    pub fn m(&self) -> usize {
        match self.kind {
            VarietyKind::ProjectiveSpace => self.n(),
            VarietyKind::Hypersurface(_) => self.n() - 1,
        }
    }

    /// Degree of the closure of `X`.
    pub fn deg_x(&self) -> u32 {
        match &self.kind {
            VarietyKind::ProjectiveSpace => 1,
            VarietyKind::Hypersurface(g) => g.degree(),
        }
    }

    pub fn kind(&self) -> &VarietyKind {
        &self.kind
    }

    pub fn equation(&self) -> Option<&Form> {
        match &self.kind {
            VarietyKind::ProjectiveSpace => None,
            VarietyKind::Hypersurface(g) => Some(g),
        }
    }

    fn check_tuple(&self, t: &FormTuple) -> Result<(), SmoothnessError> {
        if t.forms().iter().any(|f| f.field() != &self.field || f.nvars() != self.nvars) {
            return Err(SmoothnessError::RingMismatch);
        }
        Ok(())
    }

    /// The tuple's forms followed by `g`, if any.
    fn equations<'a>(&'a self, t: &'a FormTuple) -> Vec<&'a Form> {
        let mut eqs: Vec<&Form> = t.forms().iter().collect();
        if let Some(g) = self.equation() {
            eqs.push(g);
        }
        eqs
    }
}

/// The fields `F_{q^e}` for `e = 1..=max_e` with embeddings of `F_q`, and the
/// Frobenius orbit representatives of each.
#[derive(Clone, Debug)]
pub struct ExtensionTower {
    base: FieldDesc,
    levels: Vec<Level>,
}

#[derive(Clone, Debug)]
struct Level {
    embedding: Embedding,
    /// Smallest element (canonical order) of each orbit of `a -> a^q`.
    orbit_reps: Vec<u32>,
}

impl ExtensionTower {
    pub fn new(base: &FieldDesc, max_e: u32) -> Result<Self, SmoothnessError> {
        Self::with_bound(base, max_e, DEFAULT_FIELD_BOUND)
    }

    pub fn with_bound(base: &FieldDesc, max_e: u32, field_bound: u64) -> Result<Self, SmoothnessError> {
        let q = base.q() as u64;
        let mut levels = Vec::with_capacity(max_e as usize);
        for e in 1..=max_e {
            let ext = FieldDesc::with_bound(base.p() as u64, base.s() * e, field_bound)?;
            let embedding = Embedding::new(base, &ext)?;
            let orbit_reps = (0..ext.q())
                .filter(|&a| {
                    let mut x = a;
                    for _ in 1..e {
                        x = ext.frobenius_raw(x, q);
                        if x < a {
                            return false;
                        }
                    }
                    true
                })
                .collect();
            levels.push(Level { embedding, orbit_reps });
        }
        Ok(Self { base: base.clone(), levels })
    }

    pub fn base(&self) -> &FieldDesc {
        &self.base
    }

    pub fn max_e(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn field(&self, e: u32) -> &FieldDesc {
        self.levels[e as usize - 1].embedding.target()
    }

    pub fn embedding(&self, e: u32) -> &Embedding {
        &self.levels[e as usize - 1].embedding
    }

    fn orbit_reps(&self, e: u32) -> &[u32] {
        &self.levels[e as usize - 1].orbit_reps
    }
}

/// A point of `P^n` over `F_{q^e}`, normalized so the first nonzero
/// coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjPoint {
    field: FieldDesc,
    ext_degree: u32,
    coords: Vec<u32>,
    degree: u32,
}

impl ProjPoint {
    /// Point over the extension of degree `e` of `base`; coordinates are raw
    /// indices of `F_{q^e}` and are rescaled to canonical form.
    pub fn new(base: &FieldDesc, e: u32, coords: &[u32]) -> Result<Self, SmoothnessError> {
        let field = FieldDesc::new(base.p() as u64, base.s() * e)?;
        Self::in_field(base, &field, coords)
    }

    /// Rational point over the base field.
    pub fn rational(base: &FieldDesc, coords: &[u32]) -> Result<Self, SmoothnessError> {
        Self::in_field(base, base, coords)
    }

    fn in_field(base: &FieldDesc, field: &FieldDesc, coords: &[u32]) -> Result<Self, SmoothnessError> {
        if field.p() != base.p() || !field.s().is_multiple_of(base.s()) {
            return Err(SmoothnessError::RingMismatch);
        }
        if coords.iter().any(|&c| c >= field.q()) {
            return Err(SmoothnessError::InvalidPoint(format!("{coords:?} not in {field}")));
        }
        let lead = coords
            .iter()
            .copied()
            .find(|&c| c != 0)
            .ok_or_else(|| SmoothnessError::InvalidPoint("all coordinates are zero".into()))?;
        let inv = field.inv_raw(lead);
        let coords: Vec<u32> = coords.iter().map(|&c| field.mul_raw(c, inv)).collect();
        let ext_degree = field.s() / base.s();
        let q = base.q() as u64;
        let mut images = coords.clone();
        let mut degree = ext_degree;
        for d in 1..ext_degree {
            images.iter_mut().for_each(|c| *c = field.frobenius_raw(*c, q));
            if ext_degree.is_multiple_of(d) && images == coords {
                degree = d;
                break;
            }
        }
        Ok(Self { field: field.clone(), ext_degree, coords, degree })
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    /// `e` such that the coordinates live in `F_{q^e}`.
    pub fn ext_degree(&self) -> u32 {
        self.ext_degree
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    /// Degree of the closed point: the least `e'` with all coordinates in `F_{q^e'}`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Power-basis coefficient vectors of the coordinates.
    pub fn coord_vectors(&self) -> Vec<Vec<u32>> {
        self.coords.iter().map(|&c| self.field.coeffs_raw(c)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    Gb,
    Brute { max_ext: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessVerdict {
    pub smooth: bool,
    /// A singular point, found only by the brute-force oracle.
    pub witness: Option<ProjPoint>,
    pub method: OracleMethod,
}

/// Number of points of `P^n(F_Q)`, or `None` on overflow.
pub fn projective_point_count(n: usize, big_q: u64) -> Option<u64> {
    let mut total: u64 = 0;
    let mut pw: u64 = 1;
    for _ in 0..=n {
        total = total.checked_add(pw)?;
        pw = pw.checked_mul(big_q)?;
    }
    Some(total)
}

fn check_point_bound(n: usize, field: &FieldDesc, bound: u64) -> Result<(), SmoothnessError> {
    match projective_point_count(n, field.q() as u64) {
        Some(c) if c <= bound => Ok(()),
        _ => Err(SmoothnessError::BoundExceeded(format!("P^{n}(F_{})", field.q()))),
    }
}

/// All points of `P^n(F_{q^e})`, canonical representatives, ordered by the
/// position of the leading 1 and then by the later coordinates with the last
/// one varying fastest.
pub fn enumerate_projective_points(base: &FieldDesc, n: usize, e: u32) -> Result<Vec<ProjPoint>, SmoothnessError> {
    let field = FieldDesc::new(base.p() as u64, base.s() * e)?;
    check_point_bound(n, &field, DEFAULT_POINT_BOUND)?;
    let mut out = Vec::new();
    for_each_projective_coords(n, field.q(), |coords| {
        out.push(coords.to_vec());
    });
    out.into_iter().map(|c| ProjPoint::in_field(base, &field, &c)).collect()
}

pub(crate) fn for_each_projective_coords(n: usize, q: u32, mut visit: impl FnMut(&[u32])) {
    let mut coords = vec![0u32; n + 1];
    for c in 0..=n {
        coords.iter_mut().for_each(|x| *x = 0);
        coords[c] = 1;
        loop {
            visit(&coords);
            // odometer over coords[c+1..]
            let mut i = n;
            loop {
                if i == c {
                    break;
                }
                coords[i] += 1;
                if coords[i] < q {
                    break;
                }
                coords[i] = 0;
                i -= 1;
            }
            if i == c {
                break;
            }
        }
    }
}

/// Gaussian-elimination rank over `field`.
pub(crate) fn rank(field: &FieldDesc, mut rows: Vec<Vec<u32>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(r, pivot);
        let inv = field.inv_raw(rows[r][col]);
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let factor = field.mul_raw(rows[i][col], inv);
                for j in col..ncols {
                    let t = field.mul_raw(factor, rows[r][j]);
                    rows[i][j] = field.sub_raw(rows[i][j], t);
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Gradient rows of `equations` at a point, evaluated in the embedding target.
fn gradient_rank(equations: &[&Form], embedding: &Embedding, point: &[u32]) -> Result<usize, SmoothnessError> {
    let mut rows = Vec::with_capacity(equations.len());
    for f in equations {
        let row = f.gradient()?.iter().map(|d| d.evaluate_raw(embedding, point)).collect();
        rows.push(row);
    }
    Ok(rank(embedding.target(), rows))
}

fn point_embedding(base: &FieldDesc, pt: &ProjPoint) -> Result<Embedding, SmoothnessError> {
    Ok(Embedding::new(base, pt.field())?)
}

/// Pointwise smoothness: true if some `f_i` (or `g`) is nonzero at `pt`, or if
/// all vanish and the stacked Jacobian has full row rank there.
pub fn is_smooth_at_point(t: &FormTuple, x: &VarietyDesc, pt: &ProjPoint) -> Result<bool, SmoothnessError> {
    x.check_tuple(t)?;
    if pt.coords().len() != x.nvars() {
        return Err(PolyError::DimensionMismatch { expected: x.nvars(), got: pt.coords().len() }.into());
    }
    let emb = point_embedding(x.field(), pt)?;
    let eqs = x.equations(t);
    smooth_at(&eqs, &emb, pt.coords())
}

fn smooth_at(eqs: &[&Form], emb: &Embedding, point: &[u32]) -> Result<bool, SmoothnessError> {
    if eqs.iter().any(|f| f.evaluate_raw(emb, point) != 0) {
        return Ok(true);
    }
    Ok(gradient_rank(eqs, emb, point)? == eqs.len())
}

/// Generators of the singular locus of `H_f ∩ X` as homogeneous term lists.
fn singular_locus_generators(t: &FormTuple, x: &VarietyDesc) -> Result<Vec<Vec<Term>>, SmoothnessError> {
    let field = x.field();
    let eqs = x.equations(t);
    let mut gens: Vec<Vec<Term>> = eqs.iter().map(|f| f.terms().to_vec()).collect();
    if t.len() > x.m() {
        // k = m + 1: smooth means empty
        return Ok(gens);
    }
    let jac: Vec<Vec<Form>> = eqs.iter().map(|f| f.gradient()).collect::<Result<_, _>>()?;
    let size = eqs.len();
    for cols in column_subsets(x.nvars(), size) {
        let rows: Vec<Vec<&[Term]>> = jac.iter().map(|row| cols.iter().map(|&c| row[c].terms()).collect()).collect();
        let minor = poly::determinant(field, &rows);
        if !minor.is_empty() {
            gens.push(minor);
        }
    }
    Ok(gens)
}

fn column_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn check_codimension(t: &FormTuple, x: &VarietyDesc) -> Result<(), SmoothnessError> {
    let k = t.len();
    if k == 0 || k > x.m() + 1 {
        return Err(SmoothnessError::InvalidCodimension { k, max: x.m() + 1 });
    }
    Ok(())
}

/// Exact smoothness verdict via chart-wise Groebner triviality tests.
pub fn is_smooth_gb(t: &FormTuple, x: &VarietyDesc) -> Result<SmoothnessVerdict, SmoothnessError> {
    is_smooth_gb_with(t, x, &GroebnerConfig::default())
}

pub fn is_smooth_gb_with(t: &FormTuple, x: &VarietyDesc, config: &GroebnerConfig) -> Result<SmoothnessVerdict, SmoothnessError> {
    x.check_tuple(t)?;
    check_codimension(t, x)?;
    let gens = singular_locus_generators(t, x)?;
    let verdict = |smooth| SmoothnessVerdict { smooth, witness: None, method: OracleMethod::Gb };
    for chart in 0..x.nvars() {
        let affine: Vec<Vec<Term>> = gens
            .iter()
            .map(|g| poly::normalize(x.field(), g.iter().map(|&(m, c)| (m.remove_var(chart), c)).collect()))
            .filter(|g| !g.is_empty())
            .collect();
        if !groebner::terms_generate_unit(x.field(), affine, config)? {
            return Ok(verdict(false));
        }
    }
    Ok(verdict(true))
}

/// Forms with coefficients mapped into an extension, grouped per chart for
/// evaluation along lines in the last coordinate.
struct ChartForm {
    /// `by_last[j]`: terms with `x_n`-exponent `j`, as (exponents of the
    /// prefix variables `c+1..n-1`, coefficient).
    by_last: Vec<Vec<(Vec<u32>, u32)>>,
    /// Value at the single point of the last chart.
    constant: u32,
}

fn compile_chart(f: &Form, emb: &Embedding, chart: usize) -> ChartForm {
    let n = f.nvars() - 1;
    let d = f.degree() as usize;
    let mut by_last = vec![Vec::new(); d + 1];
    let mut constant = 0;
    for &(m, c) in f.terms() {
        if (0..chart).any(|i| m.exponent(i) > 0) {
            continue;
        }
        let coef = emb.embed_raw(c);
        if chart == n {
            constant = coef;
            continue;
        }
        let prefix: Vec<u32> = (chart + 1..n).map(|i| m.exponent(i)).collect();
        by_last[m.exponent(n) as usize].push((prefix, coef));
    }
    ChartForm { by_last, constant }
}

/// Visits the canonical points of one chart where every form vanishes.
///
/// With `reps`, the first free coordinate runs over Frobenius orbit
/// representatives only, so each Galois orbit is met at least once.
fn scan_chart(
    field: &FieldDesc,
    forms: &[ChartForm],
    nvars: usize,
    chart: usize,
    reps: Option<&[u32]>,
    visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let n = nvars - 1;
    let mut point = vec![0u32; nvars];
    point[chart] = 1;
    if chart == n {
        if forms.iter().all(|f| f.constant == 0) {
            return visit(&point);
        }
        return ControlFlow::Continue(());
    }
    let all: Vec<u32> = (0..field.q()).collect();
    let nprefix = n - chart - 1;
    let first_domain: &[u32] = reps.unwrap_or(&all);
    let prefix_domain = |i: usize| if i == 0 { first_domain } else { &all[..] };
    let last_domain: &[u32] = if nprefix == 0 { first_domain } else { &all };
    let max_deg = forms.iter().map(|f| f.by_last.len()).max().unwrap_or(1);

    let mut idx = vec![0usize; nprefix];
    let mut powers = vec![vec![0u32; max_deg]; nprefix];
    let mut coeffs: Vec<Vec<u32>> = forms.iter().map(|f| vec![0u32; f.by_last.len()]).collect();
    if nprefix > 0 && first_domain.is_empty() {
        return ControlFlow::Continue(());
    }
    loop {
        for i in 0..nprefix {
            let a = prefix_domain(i)[idx[i]];
            point[chart + 1 + i] = a;
            let mut acc = 1u32;
            for p in powers[i].iter_mut() {
                *p = acc;
                acc = field.mul_raw(acc, a);
            }
        }
        for (f, u) in forms.iter().zip(coeffs.iter_mut()) {
            for (j, terms) in f.by_last.iter().enumerate() {
                let mut s = 0u32;
                for (exps, c) in terms {
                    let mut v = *c;
                    for (i, &e) in exps.iter().enumerate() {
                        if e > 0 {
                            v = field.mul_raw(v, powers[i][e as usize]);
                        }
                    }
                    s = field.add_raw(s, v);
                }
                u[j] = s;
            }
        }
        for &b in last_domain {
            let vanishes = coeffs.iter().all(|u| field.eval_univariate_raw(u, b) == 0);
            if vanishes {
                point[n] = b;
                visit(&point)?;
            }
        }
        // advance the prefix odometer
        let mut i = nprefix;
        loop {
            if i == 0 {
                return ControlFlow::Continue(());
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < prefix_domain(i).len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Refutation oracle: scans closed points of degree `e <= max_e` for a point
/// of `H_f ∩ X` where the rank condition fails.
pub fn is_smooth_brute(t: &FormTuple, x: &VarietyDesc, max_e: u32) -> Result<SmoothnessVerdict, SmoothnessError> {
    let tower = ExtensionTower::new(x.field(), max_e)?;
    is_smooth_brute_with(t, x, &tower, max_e)
}

pub fn is_smooth_brute_with(t: &FormTuple, x: &VarietyDesc, tower: &ExtensionTower, max_e: u32) -> Result<SmoothnessVerdict, SmoothnessError> {
    x.check_tuple(t)?;
    check_codimension(t, x)?;
    if tower.base() != x.field() || tower.max_e() < max_e {
        return Err(SmoothnessError::RingMismatch);
    }
    let eqs = x.equations(t);
    for e in 1..=max_e {
        let field = tower.field(e);
        // Orbit representatives cut the scan by about a factor e; the bound is
        // on the points actually visited.
        let visited = projective_point_count(x.n(), field.q() as u64).map(|c| c / e as u64 + 1);
        if visited.is_none_or(|v| v > DEFAULT_POINT_BOUND) {
            return Err(SmoothnessError::BoundExceeded(format!("P^{}(F_{})", x.n(), field.q())));
        }
        let emb = tower.embedding(e);
        let mut witness: Option<Vec<u32>> = None;
        let mut failure: Option<SmoothnessError> = None;
        for chart in 0..x.nvars() {
            let compiled: Vec<ChartForm> = eqs.iter().map(|f| compile_chart(f, emb, chart)).collect();
            let flow = scan_chart(field, &compiled, x.nvars(), chart, Some(tower.orbit_reps(e)), &mut |pt| {
                match gradient_rank(&eqs, emb, pt) {
                    Ok(r) if r == eqs.len() => ControlFlow::Continue(()),
                    Ok(_) => {
                        witness = Some(pt.to_vec());
                        ControlFlow::Break(())
                    }
                    Err(err) => {
                        failure = Some(err);
                        ControlFlow::Break(())
                    }
                }
            });
            if let Some(err) = failure {
                return Err(err);
            }
            if flow.is_break() {
                break;
            }
        }
        if let Some(w) = witness {
            let pt = ProjPoint::in_field(x.field(), field, &w)?;
            return Ok(SmoothnessVerdict { smooth: false, witness: Some(pt), method: OracleMethod::Brute { max_ext: max_e } });
        }
    }
    Ok(SmoothnessVerdict { smooth: true, witness: None, method: OracleMethod::Brute { max_ext: max_e } })
}

/// `#(H_f ∩ X)(F_{q^e})`. An empty tuple counts the points of `X`.
pub fn count_points(t: &FormTuple, x: &VarietyDesc, e: u32) -> Result<u64, SmoothnessError> {
    let base = x.field();
    let field = FieldDesc::new(base.p() as u64, base.s() * e)?;
    let emb = Embedding::new(base, &field)?;
    count_points_in(t, x, &emb)
}

pub(crate) fn count_points_in(t: &FormTuple, x: &VarietyDesc, emb: &Embedding) -> Result<u64, SmoothnessError> {
    x.check_tuple(t)?;
    check_point_bound(x.n(), emb.target(), DEFAULT_POINT_BOUND)?;
    let eqs = x.equations(t);
    let mut count = 0u64;
    for chart in 0..x.nvars() {
        let compiled: Vec<ChartForm> = eqs.iter().map(|f| compile_chart(f, emb, chart)).collect();
        let _ = scan_chart(emb.target(), &compiled, x.nvars(), chart, None, &mut |_| {
            count += 1;
            ControlFlow::Continue(())
        });
    }
    Ok(count)
}

/// `#X(F_{q^e})` for `e = 1..=r`.
pub fn variety_point_counts(x: &VarietyDesc, r: u32) -> Result<Vec<u64>, SmoothnessError> {
    let empty = FormTuple::new(Vec::new())?;
    (1..=r).map(|e| count_points(&empty, x, e)).collect()
}

fn rational_point_on(x: &VarietyDesc, pt: &ProjPoint) -> Result<(), SmoothnessError> {
    if pt.field() != x.field() {
        return Err(SmoothnessError::NotRational);
    }
    if pt.coords().len() != x.nvars() {
        return Err(PolyError::DimensionMismatch { expected: x.nvars(), got: pt.coords().len() }.into());
    }
    if let Some(g) = x.equation() {
        if g.evaluate_raw(&Embedding::identity(x.field()), pt.coords()) != 0 {
            return Err(SmoothnessError::NotOnVariety);
        }
    }
    Ok(())
}

/// All `f_i` vanish at the rational point `y` and the intersection is
/// transversal there.
pub fn contains_with_transversality(t: &FormTuple, x: &VarietyDesc, y: &ProjPoint) -> Result<bool, SmoothnessError> {
    x.check_tuple(t)?;
    rational_point_on(x, y)?;
    let emb = Embedding::identity(x.field());
    if t.forms().iter().any(|f| f.evaluate_raw(&emb, y.coords()) != 0) {
        return Ok(false);
    }
    let eqs = x.equations(t);
    Ok(gradient_rank(&eqs, &emb, y.coords())? == eqs.len())
}

/// Some `f_i` is nonzero at the rational point `z`.
pub fn avoids(t: &FormTuple, x: &VarietyDesc, z: &ProjPoint) -> Result<bool, SmoothnessError> {
    x.check_tuple(t)?;
    rational_point_on(x, z)?;
    let emb = Embedding::identity(x.field());
    Ok(t.forms().iter().any(|f| f.evaluate_raw(&emb, z.coords()) != 0))
}
