use criterion::{black_box, criterion_group, criterion_main, Criterion};

use condent::bounds::cve_bounds;
use condent::channels::random_channel;
use condent::detect::{is_a_unital, DETECT_TOL};
use condent::gallery::swap_and_prepare;
use condent::linalg::{hermitian_eig, SubsystemLayout};
use condent::states::{conditional_entropy, random_state};

fn bench_hermitian_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for d in [4usize, 9, 16, 64] {
        let layout = SubsystemLayout::single("S", d).unwrap();
        let rho = random_state(&layout, d, 7).unwrap();
        group.bench_function(format!("dim_{d}"), |b| {
            b.iter(|| hermitian_eig(black_box(rho.op())).unwrap())
        });
    }
    group.finish();
}

fn bench_conditional_entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("conditional_entropy");
    for d in [2usize, 3] {
        let layout = SubsystemLayout::bipartite(d, d).unwrap();
        let rho = random_state(&layout, d * d, 11).unwrap();
        group.bench_function(format!("qudit_pair_d{d}"), |b| {
            b.iter(|| conditional_entropy(black_box(&rho), &["A"]).unwrap())
        });
    }
    group.finish();
}

fn bench_a_unitality_detection(c: &mut Criterion) {
    let mut group = c.benchmark_group("is_a_unital");
    for d in [2usize, 3] {
        let layout = SubsystemLayout::bipartite(d, d).unwrap();
        let random = random_channel(&layout, 3, 13).unwrap();
        group.bench_function(format!("random_d{d}"), |b| {
            b.iter(|| is_a_unital(black_box(&random), DETECT_TOL).unwrap())
        });
        let sp = swap_and_prepare(d).unwrap();
        group.bench_function(format!("swap_prepare_d{d}"), |b| {
            b.iter(|| is_a_unital(black_box(&sp), DETECT_TOL).unwrap())
        });
    }
    group.finish();
}

fn bench_bounds(c: &mut Criterion) {
    c.bench_function("cve_bounds_d2", |b| {
        b.iter(|| cve_bounds(black_box(1.3), 2).unwrap())
    });
}

criterion_group!(
    benches,
    bench_hermitian_eig,
    bench_conditional_entropy,
    bench_a_unitality_detection,
    bench_bounds
);
criterion_main!(benches);
