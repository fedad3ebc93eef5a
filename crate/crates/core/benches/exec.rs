use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fracground::solvers::minimize_nehari;
use fracground::verify::{kernel_suite, sp4_triviality_audit};
use fracground::{Exec, GridSpec, ProblemSpec, SolverConfig, Variant};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernels(c: &mut Criterion) {
    let g = GridSpec::new(20.0, 1 << 12).unwrap();
    let mut group = c.benchmark_group("kernel_suite");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| kernel_suite(black_box(g), exec).unwrap()));
    }
    group.finish();
}

fn sp4_audit(c: &mut Criterion) {
    let spec = ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::Sp4).unwrap();
    let g = GridSpec::new(40.0, 1024).unwrap();
    let mut group = c.benchmark_group("sp4_audit");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sp4_triviality_audit(&spec, g, 16, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let g = GridSpec::new(60.0, 2048).unwrap();
    let specs: Vec<ProblemSpec> = [0.5, 1.0, 1.5, 2.0]
        .iter()
        .map(|&c| ProblemSpec::new(1.5, c, 2.0, 3.0, Variant::Sp1).unwrap())
        .collect();
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exec.map(specs.clone(), |s| minimize_nehari(&s, g, &cfg).unwrap().action))
        });
    }
    group.finish();
}

fn map_values(c: &mut Criterion) {
    let mut group = c.benchmark_group("map_values");
    for n in [1 << 12, 1 << 18] {
        let data: Vec<f64> = (0..n).map(|i| i as f64 * 1e-3).collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &data, |b, d| {
                b.iter(|| exec.map_values(d, |v| v.abs().powf(2.5) - v.sin()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, kernels, sp4_audit, sweep, map_values);
criterion_main!(benches);
