use std::hint::black_box;

use chordal_bgw::analytic::Analysis;
use chordal_bgw::par::{map_range, Execution};
use chordal_bgw::trees::{degree_profile, ConditionedSampler};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conditioned_trees(c: &mut Criterion) {
    let analysis = Analysis::new(2, 1, 32, 1e-12).expect("analysis");
    let sampler = ConditionedSampler::new(&analysis.law).expect("sampler");
    let mut group = c.benchmark_group("conditioned_trees");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), 2000), &exec, |b, &exec| {
            b.iter(|| {
                let blacks = map_range(exec, 32, |i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
                    let (t, _) = sampler.sample(2000, &mut rng, u64::MAX).expect("tree");
                    degree_profile(&t).black
                });
                black_box(blacks)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, conditioned_trees);
criterion_main!(benches);
