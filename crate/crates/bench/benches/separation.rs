use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qap_bench::relaxation_point;
use qap_core::separation::separate_segment;

fn separation(c: &mut Criterion) {
    let mut g = c.benchmark_group("separate_segment");
    for n in [50, 100, 200, 400, 800, 1600] {
        let (seg, x, y0, y) = relaxation_point(n, 1);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| separate_segment(0, &seg, &x, y0, &y, true))
        });
    }
    g.finish();
}

criterion_group!(benches, separation);
criterion_main!(benches);
