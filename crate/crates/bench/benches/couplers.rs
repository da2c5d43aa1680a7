use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kmtlab_core::function_spaces::family;
use kmtlab_core::*;

fn couplers(c: &mut Criterion) {
    let f = family::by_id("cosine:0.4").unwrap();
    let mut group = c.benchmark_group("kmt_iid");
    for &(n, j) in &[(256u64, 10u32), (4096, 14)] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &(n, j), |b, &(n, j)| {
            let mut rep = 0;
            b.iter(|| {
                rep += 1;
                let mut rng = seed_stream(1, rep, StreamRole::Coupler);
                black_box(couple_empirical_to_bridge(&f, n, j, &mut rng).unwrap().sup)
            })
        });
    }
    group.finish();

    c.bench_function("rootwhite_n1024_j6", |b| {
        let mut rep = 0;
        b.iter(|| {
            rep += 1;
            let mut rng = seed_stream(2, rep, StreamRole::Coupler);
            black_box(couple_poisson_to_rootwhite(&f, 1024, 6, &mut rng).unwrap().corrected)
        })
    });
}

fn quantile(c: &mut Criterion) {
    c.bench_function("quantile_binomial_1e4", |b| {
        let mut z = -3.0;
        b.iter(|| {
            z = if z > 3.0 { -3.0 } else { z + 0.013 };
            black_box(coupling::quantile::quantile_couple_binomial(10_000, 0.3, z))
        })
    });
}

fn norms(c: &mut Criterion) {
    let f = family::by_id("trunclin").unwrap();
    c.bench_function("besov_j16", |b| {
        b.iter(|| {
            let pyr = haar_approximants(&f, 17).unwrap();
            black_box(besov_norm(&pyr, 0.5, 2.0, 16).unwrap().value)
        })
    });
}

criterion_group!(benches, couplers, quantile, norms);
criterion_main!(benches);
