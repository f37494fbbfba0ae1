use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use polyval::exec::{map_indexed, PARALLEL};
use polyval::gen::{instance_seed, random_game, GenConfig, WeightSpec};
use polyval::harness::{check_game, CheckOptions};
use polyval::weight::rat;
use polyval::{GameKind, GameSpec, RealizeStrategy};

fn batch(kind: GameKind, n: usize, count: u64) -> Vec<GameSpec> {
    (0..count)
        .map(|i| {
            let cfg = GenConfig {
                n,
                min_degree: 1,
                max_degree: 3,
                weights: WeightSpec::Range { lo: -10, hi: 10, max_den: 1 },
                kind: kind.clone(),
                bipartite: false,
                seed: instance_seed(99, i),
            };
            random_game(&cfg).unwrap()
        })
        .collect()
}

fn verify_batch(c: &mut Criterion) {
    let strategies = [RealizeStrategy::PassThrough];
    let opts = CheckOptions::default();
    let cases = [
        ("energy-n7", batch(GameKind::Energy, 7, 256)),
        ("discounted-n6", batch(GameKind::Discounted { lambda: rat(9, 10) }, 6, 64)),
    ];
    let mut group = c.benchmark_group("verify_batch");
    group.sample_size(10);
    for (name, games) in &cases {
        let mut modes = vec![("sequential", 1usize)];
        if PARALLEL {
            modes.push(("parallel", 0));
        }
        for (mode, jobs) in modes {
            group.bench_with_input(BenchmarkId::new(*name, mode), &jobs, |b, &jobs| {
                b.iter(|| {
                    let v = map_indexed(games.len() as u64, jobs, |i| check_game(&games[i as usize], &strategies, &opts));
                    assert!(v.iter().all(|v| v.ok));
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, verify_batch);
criterion_main!(benches);
