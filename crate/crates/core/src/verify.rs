//! Built-in invariant suite: exact identities, necklace sums, and oracle
//! agreement on exhaustively enumerated plane curves.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::gf::FieldDesc;
use crate::mpoly::{enumerate_forms, FormTuple};
use crate::predict::{self, q_pow, Rational};
use crate::smoothness::{self, ExtensionTower, VarietyDesc};

pub type LocalFactorFn = fn(u64, u32, u32, u32) -> Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct Suite {
    /// The local factor under test; [`predict::local_factor`] normally.
    pub local_factor: LocalFactorFn,
    /// Also run the 1024 plane cubics through both oracles (about a minute).
    pub cubics: bool,
}

impl Default for Suite {
    fn default() -> Self {
        Self { local_factor: predict::local_factor, cubics: false }
    }
}

fn outcome(name: &str, failures: Vec<String>, total: usize) -> Check {
    let passed = failures.is_empty();
    let detail = if passed {
        format!("{total} cases")
    } else {
        format!("{} of {total} failed, first: {}", failures.len(), failures[0])
    };
    Check { name: name.to_string(), passed, detail }
}

impl Suite {
    pub fn run(&self) -> VerifyReport {
        let mut checks = vec![
            self.local_factor_identities(),
            self.plane_curve_average(),
            self.p3_average_forms(),
            self.necklace(),
            self.point_counts_match_enumeration(),
            self.zeta_consistency(),
            self.bernoulli_range(),
        ];
        let mut degrees = vec![1, 2];
        if self.cubics {
            degrees.push(3);
        }
        for d in degrees {
            checks.push(oracle_agreement(d));
        }
        VerifyReport { checks }
    }

    fn local_factor_identities(&self) -> Check {
        let mut failures = Vec::new();
        let mut total = 0;
        for q in [2u64, 3, 5] {
            for m in 0..=4u32 {
                for e in 1..=6u32 {
                    total += 1;
                    let one = (self.local_factor)(q, m, 1, e);
                    let expected = Rational::one() - q_pow(q, -(((m + 1) * e) as i64));
                    if one != expected {
                        failures.push(format!("k=1 q={q} m={m} e={e}: {one} != {expected}"));
                    }
                    let top = (self.local_factor)(q, m, m + 1, e);
                    if top != one {
                        failures.push(format!("k=m+1 q={q} m={m} e={e}: {top} != {one}"));
                    }
                }
            }
        }
        outcome("local_factor_identities", failures, total)
    }

    fn plane_curve_average(&self) -> Check {
        let qs = [2u64, 3, 4, 5, 7, 8, 9];
        let failures = qs
            .iter()
            .filter_map(|&q| {
                let a = predict::plane_curve_average(q);
                let b = predict::average_curve_points(q, 2);
                let target = Rational::from_integer(BigInt::from(q + 1));
                (a != target || b != target).then(|| format!("q={q}: {a}, {b}"))
            })
            .collect();
        outcome("plane_curve_average", failures, qs.len())
    }

    fn p3_average_forms(&self) -> Check {
        let qs = [2u64, 3, 4, 5, 7, 8, 9];
        let mut failures: Vec<String> = qs
            .iter()
            .filter_map(|&q| {
                let a = predict::p3_average_unsimplified(q);
                let b = predict::p3_average_simplified(q);
                let c = predict::average_curve_points(q, 3);
                (a != b || a != c).then(|| format!("q={q}: {a}, {b}, {c}"))
            })
            .collect();
        let v = predict::average_curve_points(2, 3);
        if v != Rational::new(35.into(), 13.into()) {
            failures.push(format!("q=2 average {v} != 35/13"));
        }
        outcome("p3_average_forms", failures, qs.len() + 1)
    }

    fn necklace(&self) -> Check {
        let mut failures = Vec::new();
        let mut total = 0;
        for q in [2u64, 3] {
            for m in 1..=3u32 {
                let counts = predict::projective_point_counts(q, m, 12);
                match predict::closed_point_counts(&counts) {
                    Ok(a) => {
                        for e in 1..=12usize {
                            total += 1;
                            let s: BigInt = (1..=e).filter(|d| e % d == 0).map(|d| &a[d - 1] * d).sum();
                            if s != counts[e - 1] {
                                failures.push(format!("P^{m}/F_{q} e={e}"));
                            }
                        }
                    }
                    Err(err) => failures.push(format!("P^{m}/F_{q}: {err}")),
                }
            }
        }
        outcome("necklace", failures, total)
    }

    /// Closed-form `#P^m(F_{q^e})` against direct enumeration, where feasible.
    fn point_counts_match_enumeration(&self) -> Check {
        let mut failures = Vec::new();
        let mut total = 0;
        for (q, s) in [(2u64, 1u32), (3, 1)] {
            let f = FieldDesc::new(q, s).expect("small field");
            for m in 1..=3usize {
                let x = VarietyDesc::projective_space(&f, m).expect("small space");
                let empty = FormTuple::new(Vec::new()).expect("empty tuple");
                let closed = predict::projective_point_counts(q, m as u32, 12);
                for e in 1..=12u32 {
                    match smoothness::count_points(&empty, &x, e) {
                        Ok(c) => {
                            total += 1;
                            if BigInt::from(c) != closed[e as usize - 1] {
                                failures.push(format!("P^{m}/F_{q} e={e}: {c}"));
                            }
                        }
                        Err(_) => break,
                    }
                }
            }
        }
        outcome("point_counts_match_enumeration", failures, total)
    }

    fn zeta_consistency(&self) -> Check {
        let mut failures = Vec::new();
        let f2 = FieldDesc::new(2, 1).expect("F_2");
        for m in 1..=2u32 {
            let x = VarietyDesc::projective_space(&f2, m as usize).expect("P^m");
            let limit = predict::zeta_projective(2, m, m + 1).expect("convergent").recip();
            let tail = predict::truncation_tail_bound(2, m, 1, 1, 12);
            match predict::truncated_density(&x, 1, 12) {
                Ok(d) if d.max_distance(&limit) <= tail => {}
                Ok(d) => failures.push(format!("P^{m}: [{}, {}] vs {limit}", d.lower, d.upper)),
                Err(e) => failures.push(format!("P^{m}: {e}")),
            }
        }
        outcome("zeta_consistency", failures, 2)
    }

    fn bernoulli_range(&self) -> Check {
        let mut failures = Vec::new();
        let mut total = 0;
        for q in [2u64, 3, 4, 5, 7] {
            for m in 1..=5u32 {
                for k in 1..=m {
                    total += 1;
                    let pi = predict::bernoulli_p(q, m, k);
                    if pi <= Rational::from_integer(0.into()) || pi >= Rational::one() {
                        failures.push(format!("q={q} m={m} k={k}: {pi}"));
                    }
                }
            }
        }
        outcome("bernoulli_range", failures, total)
    }
}

/// Both oracles on every plane curve of degree `d` over `F_2`, with the
/// point scan running to `E = min(d(d-1)^2, 12)`, at least 1.
pub fn oracle_agreement(d: u32) -> Check {
    let name = format!("oracle_agreement_d{d}");
    let f2 = FieldDesc::new(2, 1).expect("F_2");
    let x = VarietyDesc::projective_space(&f2, 2).expect("P^2");
    let e = (d * (d - 1) * (d - 1)).clamp(1, 12);
    let run = || -> Result<(Vec<String>, usize), String> {
        let tower = ExtensionTower::new(&f2, e).map_err(|e| e.to_string())?;
        let mut failures = Vec::new();
        let mut total = 0;
        for f in enumerate_forms(&f2, 3, d).map_err(|e| e.to_string())? {
            total += 1;
            let t = FormTuple::new(vec![f.clone()]).map_err(|e| e.to_string())?;
            let gb = smoothness::is_smooth_gb(&t, &x).map_err(|e| e.to_string())?;
            let brute = smoothness::is_smooth_brute_with(&t, &x, &tower, e).map_err(|e| e.to_string())?;
            if gb.smooth != brute.smooth {
                failures.push(format!("{f}: gb {} brute {}", gb.smooth, brute.smooth));
            }
        }
        Ok((failures, total))
    };
    match run() {
        Ok((failures, total)) => outcome(&name, failures, total),
        Err(err) => Check { name, passed: false, detail: err },
    }
}
