use criterion::{black_box, criterion_group, criterion_main, Criterion};
use dfpep::model::{ApproxScheme, PhysicalConstants, PotentialParams, StateLabel};
use dfpep::oracle::{build_hamiltonian, lowest_eigenvalues, CentrifugalMode, GridSpec};
use dfpep::specfun::{erfi, jacobi_eval, JacobiIndex};
use dfpep::spectrum::{solve_relativistic, SolverWindow};
use dfpep::thermo::{partition_integral, partition_sum, Bounds, ThermoCoeffs};

fn table_potential() -> PotentialParams {
    PotentialParams::new(1.0, 2.0, 1.0, 1.0, 0.1).unwrap()
}

fn spectrum(c: &mut Criterion) {
    let params = table_potential();
    let scheme = ApproxScheme::new(1.0 / 12.0, 2.0, 4.0);
    let state = StateLabel::new(1, 2, 3).unwrap();
    let window = SolverWindow::default_for(2.0);
    c.bench_function("solve_relativistic/default_window", |b| {
        b.iter(|| solve_relativistic(black_box(&state), &params, &scheme, 2.0, &window).unwrap())
    });
}

fn special_functions(c: &mut Criterion) {
    c.bench_function("erfi/sweep", |b| {
        b.iter(|| (0..200).map(|i| erfi(black_box(i as f64 * 0.1)).unwrap()).sum::<f64>())
    });
    let idx = JacobiIndex::new(12, 1.7, 3.2).unwrap();
    c.bench_function("jacobi/n12", |b| b.iter(|| jacobi_eval(&idx, black_box(0.37))));
}

fn oracle(c: &mut Criterion) {
    let params = PotentialParams::new(0.0, -6.0, 0.5, 1.0, 0.3).unwrap();
    let state = StateLabel::new(0, 1, 3).unwrap();
    let grid = GridSpec::default_for(params.alpha);
    let constants = PhysicalConstants::default();
    let op = build_hamiltonian(&params, &state, &constants, &grid, CentrifugalMode::Exact).unwrap();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("sturm_lowest_3", |b| b.iter(|| lowest_eigenvalues(black_box(&op), 3).unwrap()));
    group.finish();
}

fn thermo(c: &mut Criterion) {
    let tc = ThermoCoeffs::new(-0.5, 2.0, 0.01, 10.5, 26.0, 0.05).unwrap();
    c.bench_function("thermo/partition_sum", |b| b.iter(|| partition_sum(black_box(&tc), 16).unwrap()));
    c.bench_function("thermo/partition_integral", |b| {
        b.iter(|| partition_integral(black_box(&tc), Bounds::Shifted).unwrap())
    });
}

criterion_group!(benches, spectrum, special_functions, oracle, thermo);
criterion_main!(benches);
