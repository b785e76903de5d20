use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use popproto::dioph::{hilbert_basis, realisable_system};
use popproto::generators::{flock_binary, flock_unary};
use popproto::pump::{build_leaderless_certificate, check_certificate, LeaderlessOptions};
use popproto::reach::{stable_set_ideals, unstable_basis, verify_threshold, Polarity};
use popproto::Limits;

fn verification(c: &mut Criterion) {
    let lim = Limits::default();
    let mut group = c.benchmark_group("verify_threshold");
    for k in 1..=3u32 {
        let eta = 1u64 << k;
        let unary = flock_unary(k).unwrap();
        let binary = flock_binary(k).unwrap();
        group.bench_with_input(BenchmarkId::new("unary", k), &unary, |b, p| {
            b.iter(|| verify_threshold(black_box(p), eta, eta + 4, &lim).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("binary", k), &binary, |b, p| {
            b.iter(|| verify_threshold(black_box(p), eta, eta + 4, &lim).unwrap())
        });
    }
    group.finish();
}

fn coverability(c: &mut Criterion) {
    let lim = Limits::default();
    let mut group = c.benchmark_group("coverability");
    for k in 1..=3u32 {
        let p = flock_binary(k).unwrap();
        group.bench_with_input(BenchmarkId::new("unstable_basis", k), &p, |b, p| {
            b.iter(|| unstable_basis(black_box(p), true, &lim).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("stable_set_ideals", k), &p, |b, p| {
            b.iter(|| stable_set_ideals(black_box(p), Polarity::S, &lim).unwrap())
        });
    }
    group.finish();
}

fn hilbert(c: &mut Criterion) {
    let lim = Limits::default();
    let mut group = c.benchmark_group("hilbert_basis");
    for (name, p) in [("binary1", flock_binary(1).unwrap()), ("binary2", flock_binary(2).unwrap()), ("unary2", flock_unary(2).unwrap())] {
        let sys = realisable_system(&p);
        group.bench_function(BenchmarkId::new("realisable", name), |b| b.iter(|| hilbert_basis(black_box(&sys), &lim).unwrap()));
    }
    group.finish();
}

fn certificates(c: &mut Criterion) {
    let lim = Limits::default();
    let p = flock_binary(2).unwrap();
    let opts = LeaderlessOptions::default();
    let cert = build_leaderless_certificate(&p, &opts, &lim).unwrap().certificate;
    c.bench_function("certificate/build/binary2", |b| {
        b.iter(|| build_leaderless_certificate(black_box(&p), &opts, &lim).unwrap())
    });
    c.bench_function("certificate/check/binary2", |b| b.iter(|| check_certificate(black_box(&p), &cert, &lim).unwrap()));
}

criterion_group!(benches, verification, coverability, hilbert, certificates);
criterion_main!(benches);
