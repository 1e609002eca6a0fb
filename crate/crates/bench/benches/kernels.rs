use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dpp_bench::problem;
use dpp_core::convolution::conv;
use dpp_core::energy::random_ic_pair;
use dpp_core::solver::{solve, SolverOptions, Stepper};
use dpp_core::{Kind, LinearSystemStats, Scheme, TimeSeries};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolve");
    for steps in [128, 512, 2048] {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut draw = |_: f64, out: &mut [f64]| out.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let a = TimeSeries::from_fn(1.0 / steps as f64, steps, Kind::Face, 16, &mut draw);
        let b = TimeSeries::from_fn(1.0 / steps as f64, steps, Kind::Face, 16, &mut draw);
        group.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |bch, _| bch.iter(|| conv(black_box(&a), black_box(&b)).unwrap()));
    }
    group.finish();
}

fn factorization(c: &mut Criterion) {
    let mut group = c.benchmark_group("factor");
    for n in [16, 32, 64] {
        let p = problem(2, n, 10);
        let opts = SolverOptions::new(Scheme::CrankNicolson);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{n}")), &n, |bch, _| {
            bch.iter(|| Stepper::new(black_box(&p), &opts).unwrap())
        });
    }
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [16, 32, 64] {
        let mut p = problem(2, n, 10);
        let pair = random_ic_pair(&p, 1, 1.0);
        for net in 0..2 {
            p.loads.networks[net].initial_velocity = pair.second[net].clone();
        }
        let opts = SolverOptions::new(Scheme::CrankNicolson);
        let stepper = Stepper::new(&p, &opts).unwrap();
        let mut stats = LinearSystemStats::default();
        let s0 = stepper.initial(&mut stats).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{n}")), &n, |bch, _| {
            bch.iter(|| stepper.advance(0, black_box(&s0), &mut stats).unwrap())
        });
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let p = problem(1, 64, 80);
    c.bench_function("solve/1d_64x80", |bch| bch.iter(|| solve(black_box(&p), Scheme::CrankNicolson).unwrap()));
}

criterion_group!(benches, convolution, factorization, stepping, full_solve);
criterion_main!(benches);
