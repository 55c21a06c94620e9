use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rentfair_bench::{full, workload};
use rentfair_core::gen::Tightness;
use rentfair_core::oracle::oracle_solve;
use rentfair_core::{baseline_allocation, solve, Family};

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for k in [1, 3] {
        for n in [3, 6, 10] {
            let economies = workload(n, k, 4, Tightness::Mid);
            for family in [Family::MaxminUtility, Family::MinmaxUtility] {
                let id = BenchmarkId::new(format!("{family}/k{k}"), n);
                group.bench_with_input(id, &economies, |b, es| {
                    b.iter(|| {
                        for e in es {
                            black_box(solve(e, &full(family, e)).unwrap());
                        }
                    })
                });
            }
        }
    }
    group.finish();
}

fn baseline(c: &mut Criterion) {
    let economies = workload(6, 3, 4, Tightness::Mid);
    c.bench_function("baseline/n6/k3", |b| {
        b.iter(|| {
            for e in &economies {
                black_box(baseline_allocation(e).unwrap());
            }
        })
    });
}

fn oracle(c: &mut Criterion) {
    let economies = workload(4, 3, 2, Tightness::Mid);
    c.bench_function("oracle/n4/k3", |b| {
        b.iter(|| {
            for e in &economies {
                black_box(oracle_solve(e, &full(Family::MaxminUtility, e)).unwrap());
            }
        })
    });
}

criterion_group!(benches, solver, baseline, oracle);
criterion_main!(benches);
