//! Shared inputs for the criterion benchmarks.

use bertini_core::mpoly::random_form;
use bertini_core::{FieldDesc, Form, FormTuple, VarietyDesc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn f2() -> FieldDesc {
    FieldDesc::new(2, 1).expect("F_2")
}

pub fn space(n: usize) -> VarietyDesc {
    VarietyDesc::projective_space(&f2(), n).expect("P^n")
}

/// `count` random tuples of forms of the given degrees in `n + 1` variables.
pub fn random_tuples(n: usize, degrees: &[u32], count: usize, seed: u64) -> Vec<FormTuple> {
    let f = f2();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let forms: Vec<Form> = degrees.iter().map(|&d| random_form(&f, n + 1, d, &mut rng).expect("form")).collect();
            FormTuple::new(forms).expect("tuple")
        })
        .collect()
}
