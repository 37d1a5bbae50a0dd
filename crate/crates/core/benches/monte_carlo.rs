use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lci_snr::scene::synth_uniform_random;
use lci_snr::{fwht_in_place, monte_carlo_snr, Architecture, Execution, MonteCarloConfig, NoiseParams};

fn fwht(c: &mut Criterion) {
    let mut group = c.benchmark_group("fwht");
    for k in [10u32, 14, 18] {
        let n = 1usize << k;
        let mut v: Vec<f64> = (0..n).map(|i| (i % 7) as f64).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| fwht_in_place(black_box(&mut v)).unwrap())
        });
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let params = NoiseParams::with_additive(5.0, 5.0);
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for n in [1024usize, 4096] {
        let scene = synth_uniform_random(n, 1e7, 1).unwrap();
        for arch in [Architecture::Lci, Architecture::Pai] {
            for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
                let cfg = MonteCarloConfig::new(256, 7).with_execution(execution);
                group.bench_function(BenchmarkId::new(format!("{arch}/{label}"), n), |b| {
                    b.iter(|| monte_carlo_snr(arch, &scene, &params, &cfg).unwrap())
                });
            }
        }
    }
    group.finish();
}

criterion_group!(benches, fwht, trials);
criterion_main!(benches);
