use ccx_core::exec::Exec;
use ccx_core::machine::{self_application, Dovetailer, Numbering};
use ccx_core::verify::{bump_sweep, omega_sweep, partition_sweep};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("omega", name), &exec, |b, &exec| b.iter(|| omega_sweep(7, 50, exec)));
        group.bench_with_input(BenchmarkId::new("partition", name), &exec, |b, &exec| b.iter(|| partition_sweep(7, 100, exec)));
        group.bench_with_input(BenchmarkId::new("bump", name), &exec, |b, &exec| b.iter(|| bump_sweep(7, 100, exec)));
    }
    group.finish();
}

fn dovetail(c: &mut Criterion) {
    let mut group = c.benchmark_group("dovetail");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("canonical_1500_stages", name), &exec, |b, &exec| {
            b.iter(|| Dovetailer::new(Numbering::canonical(), self_application).with_exec(exec).run_stages(1500))
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps, dovetail);
criterion_main!(benches);
