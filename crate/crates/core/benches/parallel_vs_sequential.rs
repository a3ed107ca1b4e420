use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wlticket::expressivity::{measure_tau, TauOptions};
use wlticket::gnn::{GnnModel, ModelConfig, Variant};
use wlticket::graph::synthetic::mutag_like;
use wlticket::graph::DEFAULT_NODE_CAP;
use wlticket::harness::{resume_sweep, DatasetSpec, ExperimentConfig, PreparedDataset};
use wlticket::tensor::Rng;
use wlticket::wl::isomorphism_type_representatives;
use wlticket::Parallelism;

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn tau(c: &mut Criterion) {
    let data = mutag_like(188, 0);
    let model = GnnModel::new(
        ModelConfig::new(Variant::Gin, data.feature_dim(), 3, 2),
        &mut Rng::new(1, 0),
    )
    .unwrap();
    let reps =
        isomorphism_type_representatives(&data, 3, DEFAULT_NODE_CAP, Parallelism::Sequential)
            .representatives;
    let mut group = c.benchmark_group("measure_tau");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| measure_tau(&model, &data, &reps, TauOptions::default(), mode).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut cfg = ExperimentConfig {
        datasets: vec![DatasetSpec("trees_vs_unicyclic:40".into())],
        rho_grid: vec![0.3, 0.6],
        seeds: 2,
        epochs: 5,
        ..Default::default()
    };
    let prepared = PreparedDataset::new(cfg.datasets[0].load(0).unwrap(), &cfg).unwrap();
    let datasets = [prepared];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, mode) in MODES {
        cfg.parallelism = mode;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| resume_sweep(&cfg, &datasets, &[]))
        });
    }
    group.finish();
}

criterion_group!(benches, tau, sweep);
criterion_main!(benches);
