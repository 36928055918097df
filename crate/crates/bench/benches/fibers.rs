use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use l2ext_bench::{complexes, two_point_module};
use l2ext_core::homology::homology_report;
use l2ext_core::spectral::{density, ns_of};
use l2ext_core::topology::mu_bounds;
use l2ext_core::Settings;

fn homology(c: &mut Criterion) {
    let mut group = c.benchmark_group("homology_report");
    group.sample_size(10);
    for (name, complex, settings) in complexes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &complex, |b, cx| {
            b.iter(|| homology_report(cx, &settings).unwrap())
        });
    }
    group.finish();
}

fn modules(c: &mut Criterion) {
    let x = two_point_module();
    let mut group = c.benchmark_group("module");
    group.sample_size(10);
    for n in [1024, 4096, 16384] {
        let s = Settings::with_points(n);
        group.bench_with_input(BenchmarkId::new("density", n), &s, |b, s| b.iter(|| density(&x, s).unwrap()));
        group.bench_with_input(BenchmarkId::new("ns", n), &s, |b, s| b.iter(|| ns_of(&x, s).unwrap()));
    }
    let s = Settings::with_points(1024);
    group.bench_function("mu_bounds/1024", |b| b.iter(|| mu_bounds(&x, &s).unwrap()));
    group.finish();
}

criterion_group!(benches, homology, modules);
criterion_main!(benches);
