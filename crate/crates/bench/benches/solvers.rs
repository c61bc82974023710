use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qedyn::dynamics::{solve_pseudomode, solve_volterra_kernel, LorentzianModeParams, PseudomodeSet, VolterraOptions};
use qedyn::kernel::{build_kernel_table, Coupling, EmitterConfig};
use qedyn::spectral::{LorentzianPeak, PurcellSpectrum};

fn spectrum() -> PurcellSpectrum {
    let peaks = vec![
        LorentzianPeak::new(300.0, 1.90, 2e-3),
        LorentzianPeak::new(800.0, 1.95, 1e-3),
        LorentzianPeak::new(150.0, 2.02, 4e-3),
    ];
    PurcellSpectrum::lorentzian_sum(peaks, (1.6, 2.3), 1.0).unwrap()
}

fn kernel_table(c: &mut Criterion) {
    let emitter = EmitterConfig::new(1.95, 59e-6, 5.0, Coupling::BeyondRwa).unwrap();
    let spec = spectrum();
    let mut group = c.benchmark_group("kernel_table");
    group.sample_size(10);
    for tmax in [500.0, 2000.0] {
        group.bench_with_input(BenchmarkId::from_parameter(tmax), &tmax, |b, &tmax| {
            b.iter(|| build_kernel_table(&emitter, &spec, black_box(tmax), 0.5).unwrap())
        });
    }
    group.finish();
}

fn volterra(c: &mut Criterion) {
    let mode = LorentzianModeParams::new(1.95, 1e-3, 10e-3, 1.95).unwrap();
    // History sums only; the refinement pass would double the work.
    let opts = VolterraOptions {
        check_convergence: false,
        ..VolterraOptions::default()
    };
    let mut group = c.benchmark_group("volterra");
    group.sample_size(10);
    for steps in [2_000usize, 10_000] {
        let kernel = mode.kernel_samples(0.5, steps);
        group.bench_with_input(BenchmarkId::from_parameter(steps), &kernel, |b, k| {
            b.iter(|| solve_volterra_kernel(black_box(k), 0.5, 0.0, &opts))
        });
    }
    group.finish();
}

fn pseudomode(c: &mut Criterion) {
    let mut group = c.benchmark_group("pseudomode");
    for n in [1usize, 3, 8] {
        let modes = PseudomodeSet::new(
            (0..n)
                .map(|j| LorentzianModeParams::new(1.90 + 0.02 * j as f64, 1e-3, 5e-3, 1.95).unwrap())
                .collect(),
        );
        group.bench_with_input(BenchmarkId::new("modes", n), &modes, |b, m| {
            b.iter(|| solve_pseudomode(black_box(m), 5000.0, 0.5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernel_table, volterra, pseudomode);
criterion_main!(benches);
