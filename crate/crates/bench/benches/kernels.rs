use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flanders::gf2::{rank_packed, PackedRank};
use flanders::verify::{census, CensusSpec, SpaceKind};
use flanders::{are_equivalent, Budget, CatalogName};
use flanders_bench::{catalog, f2, f3, masks, matrices};

fn rank_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank");
    for (n, p) in [(3, 3), (4, 4), (8, 8)] {
        let ms = masks(n, p, 1024);
        g.bench_with_input(BenchmarkId::new("f2-eliminate", format!("{n}x{p}")), &ms, |b, ms| {
            b.iter(|| ms.iter().map(|&m| rank_packed(black_box(m), n, p)).sum::<usize>())
        });
        let table = PackedRank::new(n, p);
        g.bench_with_input(BenchmarkId::new("f2-oracle", format!("{n}x{p}")), &ms, |b, ms| {
            b.iter(|| ms.iter().map(|&m| table.rank(black_box(m))).sum::<usize>())
        });
    }
    for (f, label) in [(f2(), "f2-dense"), (f3(), "f3-dense")] {
        let ms = matrices(f, 4, 4, 256);
        g.bench_with_input(BenchmarkId::new(label, "4x4"), &ms, |b, ms| {
            b.iter(|| ms.iter().map(|m| black_box(m).rank()).sum::<usize>())
        });
    }
    g.finish();
}

fn upper_rank(c: &mut Criterion) {
    let u4 = catalog(CatalogName::U4);
    let j3 = catalog(CatalogName::J3);
    c.bench_function("urk/U4", |b| b.iter(|| black_box(&u4).upper_rank(Budget::UNLIMITED).unwrap()));
    c.bench_function("urk/J3", |b| b.iter(|| black_box(&j3).upper_rank(Budget::UNLIMITED).unwrap()));
}

fn small_census(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    g.sample_size(10);
    let flanders = CensusSpec::new(f2(), 2, 2, 1, 2, SpaceKind::Affine);
    g.bench_function("F2 2x2 r1 dim2 affine", |b| b.iter(|| census(black_box(&flanders)).unwrap()));
    let j3 = CensusSpec::new(f2(), 3, 3, 2, 5, SpaceKind::Linear);
    g.bench_function("F2 3x3 r2 dim5 linear", |b| b.iter(|| census(black_box(&j3)).unwrap()));
    g.finish();
}

fn equivalence(c: &mut Criterion) {
    let u3 = catalog(CatalogName::U3);
    let t = u3.transpose();
    c.bench_function("equiv/U3 vs transpose", |b| {
        b.iter(|| are_equivalent(black_box(&u3), black_box(&t), flanders::equiv::DEFAULT_SEARCH_BUDGET).unwrap())
    });
}

criterion_group!(benches, rank_kernels, upper_rank, small_census, equivalence);
criterion_main!(benches);
