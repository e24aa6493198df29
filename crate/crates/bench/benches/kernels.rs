use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hermkr::btree::{intersect_bruteforce, TreeConfig};
use hermkr::hironaka::{f_poly_closed, f_poly_nonsplit, DensityTarget};
use hermkr::oracle::{count_solutions, LocalTarget, OracleJob};
use hermkr::{InertLocalRing, LocalHermitianSpec};

fn oracle(c: &mut Criterion) {
    let job = OracleJob::new(
        InertLocalRing::new(3, 2).unwrap(),
        LocalHermitianSpec::new(vec![1, 0]).unwrap(),
        LocalTarget::diag(&[3, 1]).unwrap(),
    )
    .unwrap();
    c.bench_function("oracle p=3 k=2 S=T=diag(3,1)", |b| b.iter(|| count_solutions(black_box(&job)).unwrap()));
}

fn densities(c: &mut Criterion) {
    let mut group = c.benchmark_group("F polynomial");
    for a in [4u32, 8, 12] {
        let t = DensityTarget::new(a, 2, 5).unwrap();
        group.bench_with_input(BenchmarkId::new("double sum", a), &t, |b, t| b.iter(|| f_poly_nonsplit(t).unwrap()));
        group.bench_with_input(BenchmarkId::new("closed form", a), &t, |b, t| b.iter(|| f_poly_closed(t).unwrap()));
    }
    group.finish();
}

fn tree(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree brute force");
    for m in [3u32, 5, 7] {
        let config = TreeConfig::new(5, m, m, 2, None).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &config, |b, cfg| b.iter(|| intersect_bruteforce(cfg)));
    }
    group.finish();
}

criterion_group!(benches, oracle, densities, tree);
criterion_main!(benches);
