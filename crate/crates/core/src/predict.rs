//! Exact-rational predictions for random complete intersections.
//!
//! For `k` random forms of large degree, the probability that `H_f ∩ X` is
//! smooth of dimension `m - k` tends to the Euler product over closed points
//! `x` of `X` of
//!
//! ```text
//! 1 - q^{-k deg x} + q^{-k deg x} L(q^{deg x}, m, k),
//! ```
//!
//! where `L(q, m, k)` is the probability that `k` random vectors in `F_q^m`
//! are linearly independent. Conditioned on smoothness, the rational points
//! of `X` lie on the intersection independently with probability
//! [`bernoulli_p`], so the point count is modeled as `Binomial(#X(F_q), π)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::smoothness::{self, SmoothnessError, VarietyDesc};

pub type Rational = BigRational;

/// Default truncation degree for Euler products.
pub const DEFAULT_TRUNCATION: u32 = 12;

/// The value printed in the literature for the average number of rational
/// points on a random smooth curve in `P^3` over `F_2`. Direct evaluation
/// gives 35/13; see [`p3_average_discrepancy_note`].
pub fn literature_p3_average() -> Rational {
    ratio(37, 13)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("inconsistent point counts: {0}")]
    InconsistentCounts(String),
    #[error(transparent)]
    Smoothness(#[from] SmoothnessError),
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `q^e` for any integer `e`.
pub fn q_pow(q: u64, e: i64) -> Rational {
    let base = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(base)
    } else {
        Rational::new(BigInt::one(), base)
    }
}

/// Decimal string with 15 significant digits.
pub fn approx_string(r: &Rational) -> String {
    let v = r.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    if !(-30..=30).contains(&exponent) {
        return format!("{v:.14e}");
    }
    let decimals = (14 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `L(q, m, k) = Π_{j<k} (1 - q^{-(m-j)})`, which is 0 for `k > m`.
pub fn lin_indep_prob(q: u64, m: u32, k: u32) -> Rational {
    if k > m {
        return Rational::zero();
    }
    (0..k).map(|j| Rational::one() - q_pow(q, -((m - j) as i64))).product()
}

/// Smoothness probability at a closed point of degree `e`.
pub fn local_factor(q: u64, m: u32, k: u32, e: u32) -> Rational {
    let qe = BigInt::from(q).pow(e).to_u64();
    let t = q_pow(q, -((k * e) as i64));
    let l = match qe {
        Some(qe) => lin_indep_prob(qe, m, k),
        None => lin_indep_prob_big(&BigInt::from(q).pow(e), m, k),
    };
    Rational::one() - &t + t * l
}

fn lin_indep_prob_big(qe: &BigInt, m: u32, k: u32) -> Rational {
    if k > m {
        return Rational::zero();
    }
    (0..k).map(|j| Rational::one() - Rational::new(BigInt::one(), qe.pow(m - j))).product()
}

/// `#P^m(F_{q^e})` for `e = 1..=r`.
pub fn projective_point_counts(q: u64, m: u32, r: u32) -> Vec<BigInt> {
    (1..=r)
        .map(|e| {
            let qe = BigInt::from(q).pow(e);
            (qe.pow(m + 1) - 1u32) / (qe - 1u32)
        })
        .collect()
}

pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Closed points of each degree from rational point counts `N_1..N_r`:
/// `a_e = (1/e) Σ_{d|e} μ(e/d) N_d`.
pub fn closed_point_counts(counts: &[BigInt]) -> Result<Vec<BigInt>, PredictError> {
    let mut out = Vec::with_capacity(counts.len());
    for e in 1..=counts.len() as u64 {
        let mut sum = BigInt::zero();
        for d in (1..=e).filter(|d| e % d == 0) {
            sum += &counts[d as usize - 1] * mobius(e / d);
        }
        let (a, rem) = sum.div_rem(&BigInt::from(e));
        if !rem.is_zero() || a.is_negative() {
            return Err(PredictError::InconsistentCounts(format!("a_{e} = {sum}/{e}")));
        }
        out.push(a);
    }
    Ok(out)
}

/// Exact products whose reduced denominator would exceed this many bits
/// are replaced by an enclosure.
pub const EXACT_PRODUCT_BITS: u64 = 1 << 14;

/// Fixed-point precision of enclosures.
pub const ENCLOSURE_BITS: u32 = 320;

/// A closed interval `[lower, upper]` of rationals; a point when exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lower: Rational,
    pub upper: Rational,
}

impl Enclosure {
    pub fn exact(value: Rational) -> Self {
        Self { lower: value.clone(), upper: value }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn value(&self) -> Option<&Rational> {
        self.is_exact().then_some(&self.lower)
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / int(2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    /// Largest distance from a point of the enclosure to `x`.
    pub fn max_distance(&self, x: &Rational) -> Rational {
        (&self.lower - x).abs().max((&self.upper - x).abs())
    }
}

/// `Π_{e<r} local_factor(q,m,k,e)^{a_e}` from rational point counts `N_1..N_{r-1}`.
///
/// Every local factor reduces to `N / q^j` with `N` prime to `q`, so the
/// exact product is formed without gcds. When its denominator would exceed
/// [`EXACT_PRODUCT_BITS`] bits the result is a rigorous enclosure of width
/// about `2^{-ENCLOSURE_BITS}` instead.
pub fn truncated_density_from_counts(q: u64, m: u32, k: u32, counts: &[BigInt], r: u32) -> Result<Enclosure, PredictError> {
    truncated_product(q, m, k, counts, r, EXACT_PRODUCT_BITS)
}

fn truncated_product(q: u64, m: u32, k: u32, counts: &[BigInt], r: u32, exact_bits: u64) -> Result<Enclosure, PredictError> {
    let upto = r.saturating_sub(1) as usize;
    if counts.len() < upto {
        return Err(PredictError::InvalidParameters(format!("need {upto} point counts, got {}", counts.len())));
    }
    let closed = closed_point_counts(&counts[..upto])?;
    let factors: Vec<Rational> = (1..=upto as u32).map(|e| local_factor(q, m, k, e)).collect();
    let bits: Option<u64> = closed
        .iter()
        .zip(&factors)
        .map(|(a, f)| a.to_u64().and_then(|a| a.checked_mul(f.denom().bits())))
        .try_fold(0u64, |acc, b| b.and_then(|b| acc.checked_add(b)));
    if bits.is_some_and(|b| b <= exact_bits) {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (a, f) in closed.iter().zip(&factors) {
            let a = a.to_u32().expect("small exponent");
            num *= f.numer().pow(a);
            den *= f.denom().pow(a);
        }
        return Ok(Enclosure::exact(Rational::new_raw(num, den)));
    }
    let mut lo = fixed_one();
    let mut hi = fixed_one();
    for (a, f) in closed.iter().zip(&factors) {
        let (f_lo, f_hi) = fixed_bounds(f);
        lo = fixed_mul(&lo, &fixed_pow(&f_lo, a, false), false);
        hi = fixed_mul(&hi, &fixed_pow(&f_hi, a, true), true);
    }
    let scale = BigInt::one() << ENCLOSURE_BITS;
    Ok(Enclosure { lower: Rational::new(lo, scale.clone()), upper: Rational::new(hi, scale) })
}

fn fixed_one() -> BigInt {
    BigInt::one() << ENCLOSURE_BITS
}

/// `(floor(x 2^P), ceil(x 2^P))`.
fn fixed_bounds(x: &Rational) -> (BigInt, BigInt) {
    let scaled = x.numer() << ENCLOSURE_BITS;
    let (quot, rem) = scaled.div_rem(x.denom());
    if rem.is_zero() {
        (quot.clone(), quot)
    } else {
        (quot.clone(), quot + 1u32)
    }
}

fn fixed_mul(a: &BigInt, b: &BigInt, round_up: bool) -> BigInt {
    let prod = a * b;
    let quot = &prod >> ENCLOSURE_BITS;
    if round_up && (quot.clone() << ENCLOSURE_BITS) != prod {
        quot + 1u32
    } else {
        quot
    }
}

fn fixed_pow(base: &BigInt, e: &BigInt, round_up: bool) -> BigInt {
    let mut acc = fixed_one();
    for i in (0..e.bits()).rev() {
        acc = fixed_mul(&acc, &acc, round_up);
        if e.bit(i) {
            acc = fixed_mul(&acc, base, round_up);
        }
    }
    acc
}

fn pow_rational(x: &Rational, e: u32) -> Rational {
    Rational::new(x.numer().pow(e), x.denom().pow(e))
}

/// Rational point counts `#X(F_{q^e})` for `e = 1..=r`: a closed form for
/// projective space, enumeration for a hypersurface.
pub fn variety_point_counts(x: &VarietyDesc, r: u32) -> Result<Vec<BigInt>, PredictError> {
    match x.equation() {
        None => Ok(projective_point_counts(x.field().q() as u64, x.n() as u32, r)),
        Some(_) => Ok(smoothness::variety_point_counts(x, r)?.into_iter().map(BigInt::from).collect()),
    }
}

/// The Euler product truncated to closed points of degree `< r`.
pub fn truncated_density(x: &VarietyDesc, k: u32, r: u32) -> Result<Enclosure, PredictError> {
    let counts = variety_point_counts(x, r.saturating_sub(1))?;
    truncated_density_from_counts(x.field().q() as u64, x.m() as u32, k, &counts, r)
}

/// Largest truncation `<= r` whose point counts `#X(F_{q^e})`, `e < r`, can
/// be obtained. Closed forms cover `P^n`; a hypersurface is enumerated.
pub fn feasible_truncation(x: &VarietyDesc, r: u32) -> u32 {
    if x.equation().is_none() {
        return r;
    }
    let q = x.field().q() as u64;
    let fits = |e: u32| {
        q.checked_pow(e)
            .filter(|&qe| qe <= crate::gf::DEFAULT_FIELD_BOUND)
            .and_then(|qe| smoothness::projective_point_count(x.n(), qe))
            .is_some_and(|c| c <= smoothness::DEFAULT_POINT_BOUND)
    };
    (1..=r).take_while(|&t| t == 1 || fits(t - 1)).last().unwrap_or(1)
}

/// `2^{m+1} deg(X) k q^{-r(2k-1)}`, bounding the omitted factors of degree `>= r`.
pub fn truncation_tail_bound(q: u64, m: u32, k: u32, deg_x: u32, r: u32) -> Rational {
    let exp = r as i64 * (2 * k as i64 - 1);
    int(BigInt::from(2u32).pow(m + 1) * deg_x * k) * q_pow(q, -exp)
}

/// `ζ_{P^m}(s) = Π_{i=0}^{m} (1 - q^{i-s})^{-1}`, for `s > m`.
pub fn zeta_projective(q: u64, m: u32, s: u32) -> Result<Rational, PredictError> {
    if s <= m {
        return Err(PredictError::InvalidParameters(format!("zeta of P^{m} diverges at s = {s}")));
    }
    let inv: Rational = (0..=m).map(|i| Rational::one() - q_pow(q, i as i64 - s as i64)).product();
    Ok(inv.recip())
}

/// `π = q^{-k} L / (1 - q^{-k} + q^{-k} L)`: the chance that a fixed rational
/// point lies on a random smooth intersection.
pub fn bernoulli_p(q: u64, m: u32, k: u32) -> Rational {
    let t = q_pow(q, -(k as i64));
    let num = &t * lin_indep_prob(q, m, k);
    let den = Rational::one() - &t + &num;
    num / den
}

/// `π^g (1-π)^h`: given smoothness, the chance of containing `g` fixed
/// rational points and avoiding `h` others.
pub fn conditional_density(q: u64, m: u32, k: u32, g: u32, h: u32) -> Rational {
    let pi = bernoulli_p(q, m, k);
    pow_rational(&pi, g) * pow_rational(&(Rational::one() - pi), h)
}

/// Stirling numbers of the second kind `S(j, i)` for `j, i <= r`.
fn stirling2(r: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); r + 1]; r + 1];
    s[0][0] = BigInt::one();
    for j in 1..=r {
        for i in 1..=j {
            s[j][i] = &s[j - 1][i - 1] + &s[j - 1][i] * i;
        }
    }
    s
}

/// Raw moments `E[S^j]`, `j = 1..=r`, of `S ~ Binomial(n, π)`:
/// `Σ_i S(j,i) n(n-1)...(n-i+1) π^i`.
pub fn model_moments(n: u64, pi: &Rational, r: usize) -> Vec<Rational> {
    let s = stirling2(r);
    (1..=r)
        .map(|j| {
            let mut acc = Rational::zero();
            let mut falling = BigInt::one();
            let mut pi_pow = Rational::one();
            for i in 1..=j {
                falling *= BigInt::from(n) - (i as u64 - 1);
                pi_pow *= pi;
                acc += int(&s[j][i] * &falling) * &pi_pow;
            }
            acc
        })
        .collect()
}

/// Central moments `E[(S - nπ)^j]`, `j = 1..=r`.
pub fn central_moments(n: u64, pi: &Rational, r: usize) -> Vec<Rational> {
    let raw = model_moments(n, pi, r);
    let mu = int(n) * pi;
    (1..=r)
        .map(|j| {
            let mut acc = Rational::zero();
            let mut binom = BigInt::one();
            for i in 0..=j {
                let raw_i = if i == 0 { Rational::one() } else { raw[i - 1].clone() };
                let term = int(binom.clone()) * raw_i * pow_rational(&-mu.clone(), (j - i) as u32);
                acc += term;
                binom = binom * (j - i) / (i + 1);
            }
            acc
        })
        .collect()
}

/// Moments of `(S - nπ) / sqrt(nπ(1-π))`, `j = 1..=r`. Odd orders are
/// irrational in general, hence floats. All NaN when the variance vanishes.
pub fn standardized_moments(n: u64, pi: &Rational, r: usize) -> Vec<f64> {
    let central = central_moments(n, pi, r);
    let var = central.get(1).cloned().unwrap_or_else(|| int(n) * pi * (Rational::one() - pi));
    if var.is_zero() {
        return vec![f64::NAN; r];
    }
    let sd = var.to_f64().unwrap_or(f64::NAN).sqrt();
    central
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let j = i as i32 + 1;
            if j % 2 == 0 {
                (c / pow_rational(&var, j as u32 / 2)).to_f64().unwrap_or(f64::NAN)
            } else {
                c.to_f64().unwrap_or(f64::NAN) / sd.powi(j)
            }
        })
        .collect()
}

/// Limiting average of `#C(F_q)` for a random smooth curve `C` cut out of
/// `P^n` by `n - 1` hypersurfaces: `#P^n(F_q) · π`.
pub fn average_curve_points(q: u64, n: u32) -> Rational {
    let count = &projective_point_counts(q, n, 1)[0];
    int(count.clone()) * bernoulli_p(q, n, n - 1)
}

/// `(q^2+q+1) q^{-1}(1-q^{-2}) / (1-q^{-3})`, which equals `q + 1`.
pub fn plane_curve_average(q: u64) -> Rational {
    let qq = int(q);
    (&qq * &qq + &qq + Rational::one()) * q_pow(q, -1) * (Rational::one() - q_pow(q, -2)) / (Rational::one() - q_pow(q, -3))
}

/// The `P^3` average in the unsimplified form
/// `(q^3+q^2+q+1) q^{-2}(1-q^{-3})(1-q^{-2}) / (1 - q^{-2} + q^{-2}(1-q^{-3})(1-q^{-2}))`.
pub fn p3_average_unsimplified(q: u64) -> Rational {
    let l = (Rational::one() - q_pow(q, -3)) * (Rational::one() - q_pow(q, -2));
    let t = q_pow(q, -2);
    let count: Rational = (0..4).map(|i| q_pow(q, i)).sum();
    count * &t * &l / (Rational::one() - &t + &t * &l)
}

/// The `P^3` average in the simplified form
/// `q + 1 - q^{-2}(1+q^{-1}) / (1 + q^{-2} - q^{-5})`.
pub fn p3_average_simplified(q: u64) -> Rational {
    int(q + 1) - q_pow(q, -2) * (Rational::one() + q_pow(q, -1)) / (Rational::one() + q_pow(q, -2) - q_pow(q, -5))
}

pub fn p3_average_discrepancy_note() -> String {
    format!(
        "P^3 curve average over F_2: the unsimplified and simplified closed forms both evaluate to {}, \
         while the literature prints {}; the computed value is reported as authoritative",
        p3_average_unsimplified(2),
        literature_p3_average()
    )
}

/// `(q + 1) Π_{j=3}^{J} (1 - q^{-j})`: the large-`n` limit of
/// [`average_curve_points`] truncated at `J`.
pub fn eta_partial(q: u64, j_max: u32) -> Rational {
    (3..=j_max).fold(int(q + 1), |acc, j| acc * (Rational::one() - q_pow(q, -(j as i64))))
}

/// `2^m deg(X) q^{me}`, an upper bound for `#X(F_{q^e})`.
pub fn lang_weil_bound(m: u32, deg_x: u32, q: u64, e: u32) -> BigInt {
    BigInt::from(2u32).pow(m) * deg_x * BigInt::from(q).pow(m * e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBoundInputs {
    pub q: u64,
    pub n: u32,
    pub p: u64,
    pub m: u32,
    pub k: u32,
    pub deg_x: u32,
    pub z: u32,
    pub degrees: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorBound {
    /// The truncation degree chosen from `d_1`; `None` when it is below 1.
    pub r: Option<u32>,
    pub value: Rational,
}

/// Largest integer `t` with `q^t <= x`, for `x > 0`.
fn floor_log(q: u64, x: &Rational) -> i64 {
    let q = int(q);
    let one = Rational::one();
    let mut t = 0i64;
    let mut pw = one.clone();
    if x >= &one {
        while &(&pw * &q) <= x {
            pw *= &q;
            t += 1;
        }
    } else {
        while &pw > x {
            pw /= &q;
            t -= 1;
        }
    }
    t
}

/// Explicit upper bound for the distance between the smooth fraction at
/// degrees `d` and the limiting density:
///
/// ```text
/// 2^{m+2} deg(X) k q^{-r(2k-1)} + (n+1) k n^m deg(X) (m+1) d_k^m q^{-⌊d_1 / max(m+1, p)⌋}
/// r = 1 + ⌊(1/m) log_q((d_1 - z + 1) / ((m+1) 2^{m+1} deg(X)))⌋
/// ```
///
/// The result is capped at 1; when `r < 1` or `m = 0` the bound is the
/// vacuous 1.
pub fn error_bound(inputs: &ErrorBoundInputs) -> Result<ErrorBound, PredictError> {
    let ErrorBoundInputs { q, n, p, m, k, deg_x, z, ref degrees } = *inputs;
    if degrees.len() != k as usize || k == 0 {
        return Err(PredictError::InvalidParameters(format!("expected {k} degrees, got {}", degrees.len())));
    }
    if degrees.windows(2).any(|w| w[0] > w[1]) {
        return Err(PredictError::InvalidParameters("degrees must be ascending".into()));
    }
    let d1 = degrees[0];
    let dk = *degrees.last().expect("k >= 1");
    if d1 < z {
        return Err(PredictError::InvalidParameters(format!("d_1 = {d1} < z = {z}")));
    }
    let vacuous = ErrorBound { r: None, value: Rational::one() };
    if m == 0 {
        return Ok(vacuous);
    }
    let ratio = Rational::new(
        BigInt::from(d1 - z + 1),
        BigInt::from(m + 1) * BigInt::from(2u32).pow(m + 1) * deg_x,
    );
    // ⌊(1/m) log_q ratio⌋ = ⌊⌊log_q ratio⌋ / m⌋
    let r = 1 + Integer::div_floor(&floor_log(q, &ratio), &(m as i64));
    if r < 1 {
        return Ok(vacuous);
    }
    let tail = int(BigInt::from(2u32).pow(m + 2) * deg_x * k) * q_pow(q, -(r * (2 * k as i64 - 1)));
    let high = int(BigInt::from(n + 1) * k * BigInt::from(n).pow(m) * deg_x * (m + 1) * BigInt::from(dk).pow(m))
        * q_pow(q, -((d1 as u64 / (m as u64 + 1).max(p)) as i64));
    let value = (tail + high).min(Rational::one());
    Ok(ErrorBound { r: Some(r as u32), value })
}

/// A rational serialized as `{"exact": "num/den", "approx": "..."}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Exact", 2)?;
        st.serialize_field("exact", &format_rational(&self.0))?;
        st.serialize_field("approx", &approx_string(&self.0))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            exact: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        parse_rational(&raw.exact).map(Exact).map_err(serde::de::Error::custom)
    }
}

/// Serialized like [`Exact`] when exact, else as
/// `{"lower": .., "upper": .., "approx": ..}`.
impl Serialize for Enclosure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        if let Some(v) = self.value() {
            return Exact(v.clone()).serialize(serializer);
        }
        let mut st = serializer.serialize_struct("Enclosure", 3)?;
        st.serialize_field("lower", &Exact(self.lower.clone()))?;
        st.serialize_field("upper", &Exact(self.upper.clone()))?;
        st.serialize_field("approx", &approx_string(&self.midpoint()))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Enclosure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            exact: Option<String>,
            lower: Option<Exact>,
            upper: Option<Exact>,
        }
        let raw = Raw::deserialize(deserializer)?;
        match (raw.exact, raw.lower, raw.upper) {
            (Some(e), _, _) => parse_rational(&e).map(Enclosure::exact).map_err(serde::de::Error::custom),
            (None, Some(lo), Some(hi)) => Ok(Enclosure { lower: lo.0, upper: hi.0 }),
            _ => Err(serde::de::Error::custom("expected exact or lower/upper")),
        }
    }
}

/// Always `num/den`, also for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveAverage {
    pub value: Exact,
    /// Only for `P^3`: the simplified closed form and the printed constant.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simplified: Option<Exact>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub literature_value: Option<Exact>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Everything [`PredictionReport::compute`] derives for one setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub q: u64,
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub deg_x: u32,
    pub r: u32,
    pub truncated_density: Enclosure,
    pub tail_bound: Exact,
    /// `ζ_X(m+1)^{-1}`, the `k = 1` limit, when `X` is projective space.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zeta_inverse: Option<Exact>,
    pub point_count: u64,
    pub pi: Exact,
    pub model_mean: Exact,
    pub model_variance: Exact,
    pub model_raw_moments: Vec<Exact>,
    /// `None` where undefined, e.g. when `π = 0`.
    pub model_standardized_moments: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error_bound_inputs: Option<ErrorBoundInputs>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error_bound: Option<Exact>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub curve_average: Option<CurveAverage>,
    pub notes: Vec<String>,
}

/// Number of model moments included in a report.
pub const REPORT_MOMENTS: usize = 6;

impl PredictionReport {
    /// `degrees`, when given, feed the explicit error bound with `z` imposed
    /// local conditions.
    pub fn compute(x: &VarietyDesc, k: u32, r: u32, degrees: Option<&[u32]>, z: u32) -> Result<Self, PredictError> {
        let q = x.field().q() as u64;
        let m = x.m() as u32;
        let n = x.n() as u32;
        if k == 0 || k > m + 1 {
            return Err(PredictError::InvalidParameters(format!("k = {k} must lie in 1..={}", m + 1)));
        }
        if r == 0 {
            return Err(PredictError::InvalidParameters("truncation degree must be positive".into()));
        }
        let requested = r;
        let r = feasible_truncation(x, r);
        let counts = variety_point_counts(x, r.saturating_sub(1).max(1))?;
        let truncated = truncated_density_from_counts(q, m, k, &counts, r)?;
        let point_count = counts[0].to_u64().ok_or_else(|| PredictError::InvalidParameters("too many rational points".into()))?;
        let pi = bernoulli_p(q, m, k);
        let raw = model_moments(point_count, &pi, REPORT_MOMENTS);
        let central = central_moments(point_count, &pi, 2);
        let zeta_inverse = match x.equation() {
            None => Some(Exact(zeta_projective(q, m, m + 1)?.recip())),
            Some(_) => None,
        };
        let (error_bound_inputs, error_bound) = match degrees {
            Some(d) => {
                let inputs = ErrorBoundInputs { q, n, p: x.field().p() as u64, m, k, deg_x: x.deg_x(), z, degrees: d.to_vec() };
                let bound = error_bound(&inputs)?;
                (Some(inputs), Some(Exact(bound.value)))
            }
            None => (None, None),
        };
        let curve_average = (x.equation().is_none() && n >= 2 && k == n - 1).then(|| {
            let value = Exact(average_curve_points(q, n));
            if n == 3 {
                CurveAverage {
                    value,
                    simplified: Some(Exact(p3_average_simplified(q))),
                    literature_value: (q == 2).then(|| Exact(literature_p3_average())),
                    note: (q == 2).then(p3_average_discrepancy_note),
                }
            } else {
                CurveAverage { value, simplified: None, literature_value: None, note: None }
            }
        });
        let mut notes = Vec::new();
        if r < requested {
            notes.push(format!(
                "truncation lowered from r = {requested} to r = {r}: #X(F_(q^e)) is found by enumeration, which is bounded at e = {}",
                r - 1
            ));
        }
        if x.equation().is_some() && k == m {
            notes.push("for a hypersurface X with k = m the intersection may be empty; empty intersections count as smooth".to_string());
        }
        if k == m + 1 {
            notes.push("k = m + 1: smooth means empty, and the density equals the k = 1 density".to_string());
        }
        Ok(Self {
            q,
            n,
            m,
            k,
            deg_x: x.deg_x(),
            r,
            truncated_density: truncated,
            tail_bound: Exact(truncation_tail_bound(q, m, k, x.deg_x(), r)),
            zeta_inverse,
            point_count,
            model_mean: Exact(raw[0].clone()),
            model_variance: Exact(central[1].clone()),
            model_raw_moments: raw.into_iter().map(Exact).collect(),
            model_standardized_moments: standardized_moments(point_count, &pi, REPORT_MOMENTS)
                .into_iter()
                .map(|x| x.is_finite().then_some(x))
                .collect(),
            pi: Exact(pi),
            error_bound_inputs,
            error_bound,
            curve_average,
            notes,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
