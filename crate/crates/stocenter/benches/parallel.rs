use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stocenter::jflat::{build_s1, sweep_convex_k};
use stocenter::model::{CenterSet, ExistentialInstance, Instance, Point, Shape};
use stocenter::objective::expected_objective_mc;
use stocenter::oracle::oracle_expected_objective;
use stocenter::partition_prob::{build_weighted_image, ImageMode};
use stocenter::Exec;

fn instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| Point(vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]))
        .collect();
    let probs = (0..n).map(|_| rng.gen_range(0.1..0.9)).collect();
    ExistentialInstance::new(2, pts, probs).unwrap().into()
}

const POLICIES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn bench(c: &mut Criterion) {
    let shape =
        Shape::Centers(CenterSet::new(vec![Point(vec![3.0, 3.0]), Point(vec![7.0, 6.0])]).unwrap());

    let mut g = c.benchmark_group("monte_carlo");
    let inst = instance(200, 1);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| expected_objective_mc(&inst, &shape, 50_000, 7, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("oracle_enumeration");
    let inst = instance(16, 2);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| oracle_expected_objective(&inst, &shape, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("exhaustive_image");
    g.sample_size(10);
    let inst = instance(12, 3);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_weighted_image(&inst, 2, 0.5, ImageMode::Exhaustive, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("kernel_sampling");
    let inst = instance(100, 4);
    let k = sweep_convex_k(&inst, 0, 0.2, None, 48).unwrap();
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_s1(&inst, &k, 2000, 96, 3, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
