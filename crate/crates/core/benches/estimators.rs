//! Sequential versus lane-parallel estimator runs.
//!
//! `lanes = 1` is the sequential path; more lanes run concurrently when the
//! `parallel` feature is on (the default). Compare with
//! `cargo bench -p rarefall --no-default-features` for the fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rarefall::estimators::{estimate_naive, estimate_sphere_is_with};
use rarefall::scenarios::db_to_linear;
use rarefall::sphere_sampler::SphereSampler;
use rarefall::{FadingScenario, OutageProblem, RunSpec, ThresholdSpec};

const SAMPLES: u64 = 200_000;

fn lane_counts() -> Vec<usize> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut lanes = vec![1, 4, cores];
    lanes.sort_unstable();
    lanes.dedup();
    lanes
}

fn bench_lanes(c: &mut Criterion) {
    let scenarios = [
        FadingScenario::inid_rayleigh(vec![db_to_linear(10.0); 4]).unwrap(),
        FadingScenario::ordered_inid_rayleigh([5.0, 5.0, 8.0, 8.0].iter().map(|&d| db_to_linear(d)).collect(), 2)
            .unwrap(),
    ];
    let mut group = c.benchmark_group("lanes");
    group.sample_size(10).throughput(Throughput::Elements(SAMPLES));
    for s in scenarios {
        let problem = OutageProblem::from_threshold(s, ThresholdSpec::new(-9.0, 1.0)).unwrap();
        let sampler = SphereSampler::new(&problem.scenario, problem.g0).unwrap();
        let combined = problem.scenario.combined_branches();
        for lanes in lane_counts() {
            let run = RunSpec::new(SAMPLES, 1).with_lanes(lanes);
            let id = format!("{}/sphere_is", problem.scenario.name());
            group.bench_with_input(BenchmarkId::new(id, lanes), &run, |b, run| {
                b.iter(|| black_box(estimate_sphere_is_with(&sampler, combined, run).unwrap()))
            });
            let id = format!("{}/naive", problem.scenario.name());
            group.bench_with_input(BenchmarkId::new(id, lanes), &run, |b, run| {
                b.iter(|| black_box(estimate_naive(&problem, run).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_lanes);
criterion_main!(benches);
