//! Replicate loops on one thread versus the default pool.
//!
//!     cargo bench -p markedk --bench replicates
//!
//! Without the `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use markedk::parallel::with_threads;
use markedk::simulate::{assign_marks_boundary, gen_hom_poisson};
use markedk::{
    default_rgrid, global_test, local_test, run_power, Hypothesis, ScenarioSpec, TestConfig, Window,
};

fn config(replicates: usize) -> TestConfig {
    let mut cfg = TestConfig::new(default_rgrid(&Window::unit_square(), 128).unwrap(), 7);
    cfg.replicates = replicates;
    cfg
}

fn threads() -> [(&'static str, Option<usize>); 2] {
    [("one_thread", Some(1)), ("default_pool", None)]
}

fn tests(c: &mut Criterion) {
    let w = Window::unit_square();
    let data = assign_marks_boundary(&gen_hom_poisson(100.0, &w, 1).unwrap(), 1.0).unwrap();
    let cfg = config(99);
    let mut group = c.benchmark_group("test_n100_b99");
    group.sample_size(10);
    for (label, t) in threads() {
        for h in [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3] {
            group.bench_with_input(BenchmarkId::new(label, h), &h, |b, &h| {
                b.iter(|| with_threads(t, || global_test(&data, h, &cfg).unwrap()))
            });
        }
        group.bench_with_input(BenchmarkId::new(label, "H1L"), &(), |b, _| {
            b.iter(|| with_threads(t, || local_test(&data, Hypothesis::H1L, &cfg).unwrap()))
        });
    }
    group.finish();
}

fn power(c: &mut Criterion) {
    let cfg = config(39);
    let scenario = ScenarioSpec::global_preset(Hypothesis::H1, 50.0, 1.0, 3);
    let mut group = c.benchmark_group("power_r20_b39");
    group.sample_size(10);
    for (label, t) in threads() {
        group.bench_function(label, |b| {
            b.iter(|| {
                with_threads(t, || {
                    run_power(&scenario, Hypothesis::H1, 20, &cfg, 3).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, tests, power);
criterion_main!(benches);
