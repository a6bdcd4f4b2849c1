//! Sequential versus rayon paths of the three data-parallel kernels.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use thermo_spectrum::spectrum::{tail_ratio_seed_at, GridBox, SeedRegion};
use thermo_spectrum::*;

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn partition(c: &mut Criterion) {
    let sys = SystemDescriptor::complex_cf();
    let f = OrderedAlphabet::new(sys.clone()).initial_block(28).unwrap();
    let mut group = c.benchmark_group("partition_z4_i28");
    for (name, exec) in PATHS {
        let opts = PartitionOptions { exec, ..PartitionOptions::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| partition_function(&sys, &f, 4, 1.5, &opts).unwrap())
        });
    }
    group.finish();
}

fn seed_box(c: &mut Criterion) {
    let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
    let region = SeedRegion::Grid(GridBox::new(500, 500));
    let mut group = c.benchmark_group("seed_box_500");
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| tail_ratio_seed_at(&a, 1, 1.8, region, exec).unwrap())
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let a = OrderedAlphabet::new(SystemDescriptor::complex_cf());
    let mut group = c.benchmark_group("transfer_assembly_p32");
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_lower_matrix(&a, 1.6, 32, 500, StraddleRule::MinOverCells, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3));
    targets = partition, seed_box, assembly
}
criterion_main!(benches);
