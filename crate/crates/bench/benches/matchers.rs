use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subpix_bench::{adversarial_pair, candidates, gray_pair, smooth_pair, translation_cover};
use subpix_core::cover::{random_in_family_2d, Cover2D, Cover3DRestricted, CoverParams, Family2D};
use subpix_core::matcher::{
    estimate_distance_single, exact_distance_under, match_general, match_smooth_over, GeneralOptions, SampleBudget,
};
use subpix_core::reduction::{match_grayscale_over, reduce_to_3d};
use subpix_core::{rng, MeteredImage};

fn estimator(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    let budget = SampleBudget::new(0.1, 1).unwrap();
    for n in [64, 256] {
        let (m1, m2) = smooth_pair(n, 0);
        let t = random_in_family_2d(&mut rng::stream(1), Family2D::Affine, n, 2.0);
        group.bench_with_input(BenchmarkId::new("single", n), &n, |b, _| {
            b.iter(|| estimate_distance_single(&MeteredImage::new(&m1), &MeteredImage::new(&m2), &t, &budget, 3))
        });
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |b, _| {
            b.iter(|| exact_distance_under(&m1, &m2, &t).unwrap())
        });
    }
    group.finish();
}

fn smooth(c: &mut Criterion) {
    let mut group = c.benchmark_group("match_smooth");
    group.sample_size(10);
    for n in [64, 128, 256] {
        let (m1, m2) = smooth_pair(n, 0);
        let cover = translation_cover(n, 0.25);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| match_smooth_over(&m1, &m2, &cover, 0.1, 7).unwrap())
        });
    }
    group.finish();
}

fn general(c: &mut Criterion) {
    let mut group = c.benchmark_group("match_general");
    group.sample_size(10);
    for n in [32, 64, 128] {
        let (m1, m2) = adversarial_pair(n, 0);
        let cands = candidates(&translation_cover(n, 0.5));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| match_general(&m1, &m2, 0.2, &cands, 7, &GeneralOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn grayscale(c: &mut Criterion) {
    let mut group = c.benchmark_group("grayscale");
    group.sample_size(10);
    let n = 64;
    let (m1, m2) = gray_pair(n, 0);
    let cover = Cover3DRestricted::build_family(CoverParams::new(n, 0.25, 2.0).unwrap(), Family2D::Identity).unwrap();
    group.bench_function("reduce_64", |b| b.iter(|| reduce_to_3d(black_box(&m1))));
    group.bench_function("match_identity_planar_64", |b| {
        b.iter(|| match_grayscale_over(&m1, &m2, &cover, 0.1, 7).unwrap())
    });
    group.finish();
}

fn covers(c: &mut Criterion) {
    let cover = Cover2D::build(CoverParams::new(32, 0.5, 2.0).unwrap().with_cap(u64::MAX)).unwrap();
    c.bench_function("cover_certificate_100", |b| b.iter(|| cover.certificate(100, black_box(5))));
}

criterion_group!(benches, estimator, smooth, general, grayscale, covers);
criterion_main!(benches);
