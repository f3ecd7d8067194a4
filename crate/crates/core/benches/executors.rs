use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
#[cfg(feature = "parallel")]
use truthlab_core::exec::Parallel;
use truthlab_core::exec::Sequential;
use truthlab_core::lowerbounds::{brute_force_search, deterministic_family, Objective};
use truthlab_core::model::Budget;
use truthlab_core::scheduling::{optimal_makespan_with, random_instance};

fn makespan(c: &mut Criterion) {
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = random_instance(&mut rng, 3, 8, 1, 10);
    let mut group = c.benchmark_group("optimal_makespan_3x8");
    group.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| optimal_makespan_with(black_box(&inst), &budget, Sequential).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::from_parameter("parallel"), |b| {
        b.iter(|| optimal_makespan_with(black_box(&inst), &budget, Parallel).unwrap())
    });
    group.finish();
}

fn rule_search(c: &mut Criterion) {
    let budget = Budget::default();
    let family = deterministic_family(&BigRational::new(1.into(), 100.into())).unwrap();
    let mut group = c.benchmark_group("deterministic_family_brute_force");
    group.sample_size(20);
    group.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| brute_force_search(black_box(&family), Objective::Worst, true, &budget, Sequential).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::from_parameter("parallel"), |b| {
        b.iter(|| brute_force_search(black_box(&family), Objective::Worst, true, &budget, Parallel).unwrap())
    });
    group.finish();
}

criterion_group!(benches, makespan, rule_search);
criterion_main!(benches);
