use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elastic_graphs::matching::{build_affinity, match_approx, match_exact};
use elastic_graphs::{MatchConfig, Solver};
use elastic_graphs_bench::{graph, rng};
use std::hint::black_box;

fn matching(c: &mut Criterion) {
    let config = MatchConfig::default();
    let mut group = c.benchmark_group("matching");
    group.sample_size(10);
    for n in [5, 7, 12] {
        let mut r = rng(n as u64);
        let a1 = graph(&mut r, n, 0.4, 20);
        let a2 = graph(&mut r, n, 0.4, 20);
        group.bench_with_input(BenchmarkId::new("affinity", n), &n, |b, _| {
            b.iter(|| build_affinity(black_box(&a1), black_box(&a2), &config.affinity_align).unwrap())
        });
        for solver in [Solver::Spectral, Solver::Graduated] {
            group.bench_with_input(BenchmarkId::new(solver.to_string(), n), &n, |b, _| {
                b.iter(|| match_approx(black_box(&a1), black_box(&a2), solver, &config).unwrap())
            });
        }
        if n <= 7 {
            group.bench_with_input(BenchmarkId::new("exact", n), &n, |b, _| {
                b.iter(|| match_exact(black_box(&a1), black_box(&a2), &config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, matching);
criterion_main!(benches);
