use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elastic_graphs::curve::{align, optimal_reparam, srvf, AlignOptions};
use elastic_graphs_bench::{curve, rng};
use std::hint::black_box;

fn alignment(c: &mut Criterion) {
    let mut r = rng(1);
    let mut group = c.benchmark_group("alignment");
    for samples in [20, 50, 100] {
        let q1 = srvf(&curve(&mut r, samples, [0.0, 0.0]));
        let q2 = srvf(&curve(&mut r, samples, [0.0, 0.0]));
        group.bench_with_input(BenchmarkId::new("dp", samples), &samples, |b, _| {
            b.iter(|| optimal_reparam(black_box(&q1), black_box(&q2)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("full", samples), &samples, |b, _| {
            b.iter(|| align(black_box(&q1), black_box(&q2), &AlignOptions::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("coarse", samples), &samples, |b, _| {
            b.iter(|| align(black_box(&q1), black_box(&q2), &AlignOptions::coarse()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, alignment);
criterion_main!(benches);
