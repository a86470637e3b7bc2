use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use decomp_forge::algebraic::triangle_decompose_algebraic;
use decomp_forge::barriers::{detect_divisibility_barrier, parity_barrier};
use decomp_forge::codegree::perfect_matching_codegree;
use decomp_forge::exact::exact_triangle_decomposition;
use decomp_forge::generators::generate_codegree_3graph;
use decomp_forge::iterative::{triangle_decompose_iterative, IterativeParams};
use decomp_forge::nibble::{rodl_nibble, NibbleParams};
use decomp_forge::relaxations::fractional_triangle_decomposition;
use decomp_forge::{Hypergraph, SimpleGraph};

fn nibble(c: &mut Criterion) {
    let mut g = c.benchmark_group("nibble");
    for n in [30usize, 60] {
        let h = Hypergraph::complete(n, 3);
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| rodl_nibble(black_box(h), &NibbleParams::with_seed(1)).unwrap())
        });
    }
    g.finish();
}

fn codegree(c: &mut Criterion) {
    let h = generate_codegree_3graph(18, 0.6, 3).unwrap();
    c.bench_function("codegree/18", |b| {
        // A failed seed still costs a full run, so either outcome is timed.
        b.iter(|| perfect_matching_codegree(black_box(&h), 0.05, 7).is_ok())
    });
}

fn triangles(c: &mut Criterion) {
    let mut g = c.benchmark_group("triangles");
    g.sample_size(10);
    let k9 = SimpleGraph::complete(9);
    g.bench_function("exact/K9", |b| {
        b.iter(|| exact_triangle_decomposition(black_box(&k9)).unwrap())
    });
    g.bench_function("fractional/K9", |b| {
        b.iter(|| fractional_triangle_decomposition(black_box(&k9)).unwrap())
    });
    let k13 = SimpleGraph::complete(13);
    g.bench_function("algebraic/K13", |b| {
        b.iter(|| triangle_decompose_algebraic(black_box(&k13), 1).is_ok())
    });
    g.bench_function("iterative/K13", |b| {
        b.iter(|| {
            triangle_decompose_iterative(black_box(&k13), &IterativeParams::default(), 1).is_ok()
        })
    });
    g.finish();
}

fn barriers(c: &mut Criterion) {
    let (h, p) = parity_barrier(12, 3).unwrap();
    c.bench_function("barrier-detect/parity-12", |b| {
        b.iter(|| detect_divisibility_barrier(black_box(&h), &p).unwrap())
    });
}

criterion_group!(benches, nibble, codegree, triangles, barriers);
criterion_main!(benches);
