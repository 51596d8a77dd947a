use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use freqbias_core::analysis::KappaFit;
use freqbias_core::fem::{assemble, project_initial};
use freqbias_core::{
    build_coefficients, build_mesh, dft_forward, estimate_kappa, frozen_solution, init_network, train,
    Complex64, DistributionSpec, SampleGrid, SpectralSnapshot, SpectralTrace, TargetSpec, TrainConfig,
};

fn reference_dist() -> DistributionSpec {
    DistributionSpec::normal(300.0 / (2.0 * PI)).unwrap()
}

fn bench_dft(c: &mut Criterion) {
    let grid = SampleGrid::reference();
    let signal: Vec<f64> = grid.points().iter().map(|x| (4.2 * PI * x).sin().round()).collect();
    c.bench_function("dft_forward_240", |b| b.iter(|| dft_forward(&signal, &grid, 0.0).unwrap()));
}

fn bench_gradient(c: &mut Criterion) {
    let cfg = TrainConfig::default();
    let net = init_network(&cfg).unwrap();
    let target = TargetSpec::default();
    c.bench_function("loss_and_grad_m2000_n240", |b| {
        b.iter(|| net.loss_and_grad(&cfg.grid, &target))
    });
}

fn bench_train(c: &mut Criterion) {
    let cfg = TrainConfig {
        iterations: 100,
        snapshot_every: 10,
        frozen_w: true,
        ..TrainConfig::default()
    };
    c.bench_function("train_100_iterations_m2000", |b| b.iter(|| train(&cfg).unwrap()));
}

fn bench_fem(c: &mut Criterion) {
    let mesh = build_mesh(-60.0, 60.0, 0.5).unwrap();
    let coeffs = build_coefficients(reference_dist(), 1.0, 2.0 * PI, 1).unwrap();
    c.bench_function("fem_assemble_241", |b| b.iter(|| assemble(&mesh, &coeffs, 0.1).unwrap()));

    let system = assemble(&mesh, &coeffs, 0.1).unwrap();
    let grid = SampleGrid::reference().frequency_grid();
    let u0 = SpectralSnapshot::new(grid, vec![Complex64::new(1.0, 0.0); grid.len], 0.0).unwrap();
    let state = project_initial(&u0, &mesh).unwrap();
    c.bench_function("fem_evolve_500_steps", |b| {
        b.iter_batched(|| state.clone(), |s| system.evolve(&s, 500, 50).unwrap(), BatchSize::SmallInput)
    });
}

fn bench_kappa(c: &mut Criterion) {
    let grid = SampleGrid::reference().frequency_grid();
    let u0 = SpectralSnapshot::new(grid, vec![Complex64::new(1.0, 0.5); grid.len], 0.0).unwrap();
    let d = reference_dist();
    let trace = SpectralTrace::new((0..=100).map(|k| frozen_solution(&u0, &d, k as f64).unwrap()).collect()).unwrap();
    c.bench_function("estimate_kappa_101_snapshots", |b| {
        b.iter(|| estimate_kappa(&trace, &KappaFit::default()).unwrap())
    });
}

criterion_group!(benches, bench_dft, bench_gradient, bench_train, bench_fem, bench_kappa);
criterion_main!(benches);
