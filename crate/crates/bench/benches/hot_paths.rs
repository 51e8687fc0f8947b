//! Hot paths: the predictor map at several depths, the exact LTI predictor
//! and a short closed-loop run.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::dvector;
use std::hint::black_box;

use predictorlab::{
    catalog_get, lti_predict, predict, run_closed_loop, CatalogPlant, ExogenousSignal,
    InitialHistory, InitialInput, PredictorConfig, PredictorSpec, SimConfig, ZohSignal,
};

fn bench_predict(c: &mut Criterion) {
    let plant = match catalog_get("example4").unwrap() {
        CatalogPlant::StrictFeedback(p) => p,
        _ => unreachable!(),
    };
    let z = dvector![1.0, 1.0];
    let u = ZohSignal::new(&[(0.0, -2.0), (0.2, 1.0), (0.4, -0.5)]).unwrap();
    let mut group = c.benchmark_group("predict");
    for (l, m) in [(1usize, 2usize), (4, 2), (8, 4)] {
        let cfg = PredictorConfig::for_plant(&plant, l, m, 256).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("l{l}_m{m}")),
            &cfg,
            |b, cfg| {
                b.iter(|| predict(black_box(&plant), cfg, black_box(&z), black_box(&u)).unwrap())
            },
        );
    }
    group.finish();
}

fn bench_lti_predict(c: &mut Criterion) {
    let plant = match catalog_get("lti").unwrap() {
        CatalogPlant::Lti(p) => p,
        _ => unreachable!(),
    };
    let z = dvector![1.0, -0.5];
    let u = ZohSignal::new(&[(-0.5, -2.0), (-0.3, 1.0), (-0.1, 0.5)]).unwrap();
    c.bench_function("lti_predict", |b| {
        b.iter(|| lti_predict(black_box(&plant), black_box(&z), black_box(&u), 0.0).unwrap())
    });
}

fn bench_closed_loop(c: &mut Criterion) {
    let cfg = SimConfig {
        plant: "example4".into(),
        injection: vec![-3.0, -3.0],
        theta: 1.0,
        feedback: vec![-15.0, -8.0],
        predictor: PredictorSpec::Approx {
            picard_depth: 1,
            sub_intervals: 2,
            quadrature_nodes: 256,
        },
        t1: 0.03,
        t2: 0.01,
        h: 1e-3,
        t_end: 2.0,
        x0: InitialHistory::Constant(vec![1.0, 1.0]),
        u0: InitialInput::Constant(-2.0),
        z0: vec![0.0, 0.0],
        w0: 0.0,
        d: ExogenousSignal::Zero,
        xi: ExogenousSignal::Zero,
        b: ExogenousSignal::Zero,
        monitors: false,
        seed: 42,
    };
    c.bench_function("closed_loop_2s", |b| {
        b.iter(|| run_closed_loop(black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, bench_predict, bench_lti_predict, bench_closed_loop);
criterion_main!(benches);
