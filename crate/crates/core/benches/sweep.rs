use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mhd_rt::growth::dispersion_sweep_with;
use mhd_rt::{build_mesh, Execution, FluidParams, Frequency, HermiteSpace, MagneticConfig};

fn sweep(c: &mut Criterion) {
    let params = FluidParams::new(2.0, 1.0, 0.1, 0.1, 1.0).unwrap();
    let mag = MagneticConfig::vertical(0.3).unwrap();
    let grid: Vec<Frequency> = (1..=32)
        .map(|i| Frequency::planar(0.5 * i as f64))
        .collect();
    let mut group = c.benchmark_group("dispersion_sweep");
    group.sample_size(10);
    for n in [12, 24] {
        let space = HermiteSpace::new(build_mesh(n, 0.3).unwrap());
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(label, n), &space, |b, space| {
                b.iter(|| {
                    dispersion_sweep_with(exec, &params, &mag, black_box(&grid), space).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
