use std::hint::black_box;

use bertini_bench::{f2, random_tuples, space};
use bertini_core::smoothness::{self, ExtensionTower};
use bertini_core::FieldDesc;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn field_mul(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_mul");
    for (p, s) in [(2u64, 8u32), (2, 20), (3, 10), (65521, 1)] {
        let f = FieldDesc::new(p, s).unwrap();
        let q = f.q();
        let xs: Vec<u32> = (0..1024u32).map(|i| i.wrapping_mul(2654435761) % q).collect();
        group.bench_function(BenchmarkId::from_parameter(format!("{p}^{s}")), |b| {
            b.iter(|| xs.windows(2).fold(1u32, |acc, w| f.add_raw(acc, f.mul_raw(w[0], w[1]))))
        });
    }
    group.finish();
}

fn gb_smoothness(c: &mut Criterion) {
    let mut group = c.benchmark_group("gb_smoothness");
    for (name, n, degrees) in [("P2_d4", 2usize, vec![4u32]), ("P2_d8", 2, vec![8]), ("P3_33", 3, vec![3, 3])] {
        let x = space(n);
        let tuples = random_tuples(n, &degrees, 32, 1);
        group.bench_function(name, |b| {
            b.iter(|| tuples.iter().filter(|t| smoothness::is_smooth_gb(t, &x).unwrap().smooth).count())
        });
    }
    group.finish();
}

fn brute_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_scan");
    group.sample_size(10);
    let x = space(2);
    let tuples = random_tuples(2, &[3], 8, 2);
    for e in [4u32, 8, 12] {
        let tower = ExtensionTower::new(&f2(), e).unwrap();
        group.bench_function(BenchmarkId::new("cubics", e), |b| {
            b.iter(|| tuples.iter().filter(|t| smoothness::is_smooth_brute_with(t, &x, &tower, black_box(e)).unwrap().smooth).count())
        });
    }
    group.finish();
}

fn point_count(c: &mut Criterion) {
    let x = space(2);
    let tuples = random_tuples(2, &[6], 8, 3);
    c.bench_function("count_points_P2_d6_e6", |b| b.iter(|| tuples.iter().map(|t| smoothness::count_points(t, &x, 6).unwrap()).sum::<u64>()));
}

criterion_group!(benches, field_mul, gb_smoothness, brute_scan, point_count);
criterion_main!(benches);
