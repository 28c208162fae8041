use criterion::{criterion_group, criterion_main, Criterion};
use isomono_core::isoflow::integrate_flow;
use isomono_core::monodromy::{default_base_point, monodromy_rep};
use isomono_core::sampling::{random_flow_experiment, random_schlesinger_state, SchlesingerSampleSpec};
use isomono_core::wstructures::{identity_sweep, random_w_sample, w3n_curvature_blocks, SweepOptions, WSampleSpec};
use std::hint::black_box;

fn transport(c: &mut Criterion) {
    let conn = random_schlesinger_state(&SchlesingerSampleSpec::new(4, 2), 1)
        .connection()
        .unwrap();
    let base = default_base_point(conn.points());
    c.bench_function("monodromy_rep n=4 N=2 tol=1e-10", |b| {
        b.iter(|| monodromy_rep(black_box(&conn), base, 1e-10).unwrap())
    });
}

fn schlesinger_flow(c: &mut Criterion) {
    let e = random_flow_experiment(&SchlesingerSampleSpec::new(4, 2), 0.3, 1);
    c.bench_function("schlesinger flow n=4 N=2 |t|=0.3", |b| {
        b.iter(|| integrate_flow(black_box(&e.state), e.direction, e.t_end, 1e-10).unwrap())
    });
}

fn w3n_curvature(c: &mut Criterion) {
    let s = random_w_sample(&WSampleSpec::new(3, Some(3)), 1).unwrap();
    c.bench_function("w3n curvature N=3 orders (6,2)", |b| {
        b.iter(|| w3n_curvature_blocks(black_box(&s)).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let mut opts = SweepOptions::new(1);
    opts.samples = 10;
    opts.maps = 5;
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("identity sweep 10 samples", |b| b.iter(|| identity_sweep(black_box(&opts)).unwrap()));
    group.finish();
}

criterion_group!(benches, transport, schlesinger_flow, w3n_curvature, sweep);
criterion_main!(benches);
