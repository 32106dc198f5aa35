use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use dg_core::{canonical_code, generate_dg, is_isomorphic, recognize};

const SIZES: [usize; 3] = [1_000, 10_000, 100_000];

fn recognition(c: &mut Criterion) {
    let mut group = c.benchmark_group("recognize");
    for n in SIZES {
        let (g, _) = generate_dg(n as u64, n);
        group.throughput(Throughput::Elements(g.edge_count() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| b.iter(|| recognize(g)));
    }
    group.finish();
}

fn coding(c: &mut Criterion) {
    let mut group = c.benchmark_group("canonical_code");
    for n in SIZES {
        let (g, _) = generate_dg(n as u64, n);
        group.throughput(Throughput::Elements(g.edge_count() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| canonical_code(g).unwrap())
        });
    }
    group.finish();
}

fn isomorphism(c: &mut Criterion) {
    let n = 10_000;
    let (g, _) = generate_dg(7, n);
    let renamed = g.renamed(|name| format!("r_{name}")).unwrap();
    c.bench_function("is_isomorphic/10000", |b| {
        b.iter(|| is_isomorphic(&g, &renamed).unwrap().unwrap())
    });
}

fn generation(c: &mut Criterion) {
    c.bench_function("generate_dg/10000", |b| b.iter(|| generate_dg(0, 10_000)));
}

criterion_group!(benches, recognition, coding, isomorphism, generation);
criterion_main!(benches);
