use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use etrees::enrich::Decorator;
use etrees::parallel::{replicate, Exec};
use etrees::series::{classify, preset};
use etrees::species::presets;
use etrees::treegen::{Backend, SgtSampler};

fn trees(c: &mut Criterion) {
    let w = preset("uniform-plane").unwrap();
    let prof = classify(&w).unwrap();
    let s = SgtSampler::new(&w, &prof, 2000, Backend::CycleLemma).unwrap();
    let mut g = c.benchmark_group("plane trees n=2000 x64");
    for (name, exec) in [("sequential", Exec::Sequential), ("threads", Exec::Threads(0))] {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| replicate(64, black_box(7), exec, |_, rng| s.sample(rng).unwrap().len()))
        });
    }
    g.finish();
}

fn block_graphs(c: &mut Criterion) {
    let class = presets::block_graph(4).unwrap();
    let w = class.weights();
    let prof = classify(&w).unwrap();
    let s = SgtSampler::new(&w, &prof, 500, Backend::RecursiveZ).unwrap();
    let deco = Decorator::new(&class.r, 500).unwrap();
    let mut g = c.benchmark_group("decorated block graphs n=500 x32");
    g.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("threads", Exec::Threads(0))] {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                replicate(32, black_box(11), exec, |_, rng| {
                    let t = s.sample(rng).unwrap();
                    deco.decorate(&t, rng).unwrap().len()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, trees, block_graphs);
criterion_main!(benches);
