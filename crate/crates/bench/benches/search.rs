use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rtknn::{
    brute_force_knn, build_scene, enhanced_query, filter_refine_query, MetricSpec, ReductionConfig,
};
use rtknn_bench::unit_cube;

const METRICS: [MetricSpec; 4] = [
    MetricSpec::Lp(1.0),
    MetricSpec::Lp(2.0),
    MetricSpec::Lp(3.0),
    MetricSpec::LInf,
];

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("bvh_build");
    for n in [10_000, 100_000] {
        let (points, _) = unit_cube(n, 0, 1);
        let config = ReductionConfig::new(MetricSpec::Lp(2.0), 0.05, 10);
        group.bench_with_input(BenchmarkId::from_parameter(n), &points, |b, pts| {
            b.iter(|| build_scene(black_box(pts), &config).unwrap())
        });
    }
    group.finish();
}

fn query(c: &mut Criterion) {
    let (points, queries) = unit_cube(100_000, 256, 2);
    let mut group = c.benchmark_group("query_100k");
    for metric in METRICS {
        let plain = ReductionConfig::new(metric, 0.04, 10);
        let enhanced = plain.enhanced(true);
        let plain_bvh = build_scene(&points, &plain).unwrap();
        let enhanced_bvh = build_scene(&points, &enhanced).unwrap();
        group.bench_function(BenchmarkId::new("plain", metric), |b| {
            b.iter(|| {
                for q in &queries {
                    black_box(filter_refine_query(&plain_bvh, *q, &plain).unwrap());
                }
            })
        });
        group.bench_function(BenchmarkId::new("enhanced", metric), |b| {
            b.iter(|| {
                for q in &queries {
                    black_box(enhanced_query(&enhanced_bvh, *q, &enhanced).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn brute_force(c: &mut Criterion) {
    let (points, queries) = unit_cube(100_000, 16, 3);
    c.bench_function("brute_force_100k_l2", |b| {
        b.iter(|| {
            for q in &queries {
                black_box(brute_force_knn(&points, q, MetricSpec::Lp(2.0), 10, None).unwrap());
            }
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = build, query, brute_force
}
criterion_main!(benches);
