//! Hot-kernel benchmarks: box-norm maximization (exact and heuristic),
//! bracket-matrix evaluation over a grid, and Hilbert curve descents.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pblab_core::cover::{translated_disk, DiscreteCover};
use pblab_core::partition::{canonical_partition_discrete, BumpProfile};
use pblab_core::pbnorm::{inf1_norm_exact, inf1_norm_heuristic, pb_of_discrete, PbConfig};
use pblab_core::scenarios::torus_surface;
use pblab_core::spacefill::HilbertCurve;

fn random_antisymmetric(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(-1.0..1.0);
            p[i * n + j] = v;
            p[j * n + i] = -v;
        }
    }
    p
}

fn bench_inf1_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("inf1_norm");
    for n in [8usize, 12, 16] {
        let p = random_antisymmetric(n, 11);
        group.bench_with_input(BenchmarkId::new("exact", n), &p, |b, p| {
            b.iter(|| inf1_norm_exact(black_box(p), n))
        });
    }
    for n in [16usize, 32, 64] {
        let p = random_antisymmetric(n, 13);
        group.bench_with_input(BenchmarkId::new("heuristic_r8", n), &p, |b, p| {
            b.iter(|| inf1_norm_heuristic(black_box(p), n, 8, 1, &[]))
        });
    }
    group.finish();
}

fn bench_pb_of_partition(c: &mut Criterion) {
    let t = torus_surface(64).unwrap();
    let cover = DiscreteCover::new(vec![
        translated_disk(&t, [0.0, 0.0], 0.6, 0.1).unwrap(),
        translated_disk(&t, [1.0 / 3.0, 1.0 / 3.0], 0.6, 0.1).unwrap(),
        translated_disk(&t, [2.0 / 3.0, 2.0 / 3.0], 0.6, 0.1).unwrap(),
    ])
    .unwrap();
    let partition = canonical_partition_discrete(&cover, &BumpProfile::default()).unwrap();
    let cfg = PbConfig::default();
    c.bench_function("pb_three_disk_64", |b| {
        b.iter(|| pb_of_discrete(black_box(&partition), &cfg).unwrap())
    });
}

fn bench_hilbert(c: &mut Criterion) {
    let curve2 = HilbertCurve::new(2, 10).unwrap();
    let curve3 = HilbertCurve::new(3, 6).unwrap();
    c.bench_function("hilbert_point_d2_m10", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i = (i + 1) % 10_000;
            curve2.point(black_box(i as f64 / 10_000.0)).unwrap()
        })
    });
    c.bench_function("hilbert_histogram_d3_m4", |b| {
        b.iter(|| curve3.preimage_histogram(black_box(4)).unwrap())
    });
}

criterion_group!(benches, bench_inf1_norm, bench_pb_of_partition, bench_hilbert);
criterion_main!(benches);
