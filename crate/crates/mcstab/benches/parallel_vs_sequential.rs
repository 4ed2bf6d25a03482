//! Benchmarks the alternating-least-squares core with its data-parallel
//! inner loops against single-threaded execution.
//!
//! Bench IDs are the same with and without the `parallel` feature, so running
//! `cargo bench -p mcstab` and then `cargo bench -p mcstab --no-default-features`
//! makes criterion report the sequential build as a change against the saved
//! parallel baseline. With the feature enabled, an extra `one_thread` group
//! additionally runs the identical workload inside a one-thread rayon pool,
//! giving an in-process comparison that isolates scheduling overhead from
//! build differences. The solver's outputs are bit-identical in every mode;
//! only the wall time differs.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mcstab::factor::{als_solve, SolveResult, SolverConfig};
use mcstab::matcore::{sample_uniform, ObservedMatrix};

/// Square problem sizes swept by every group.
const SIZES: [usize; 2] = [192, 384];
const RANK: usize = 8;
const SAMPLING_RATE: f64 = 0.15;
/// Fixed sweep count: `rel_tolerance = 0` disables early convergence, so each
/// measurement performs exactly this much work.
const SWEEPS: usize = 6;

fn bench_instance(n: usize, seed: u64) -> ObservedMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let truth = gaussian(n, RANK) * gaussian(n, RANK).transpose();
    let count = ((n * n) as f64 * SAMPLING_RATE).round() as usize;
    let omega = sample_uniform(n, n, count, seed ^ 0xA5A5).expect("valid sample request");
    let k = truth.amax() + 1.0;
    ObservedMatrix::new(truth, omega, k).expect("consistent instance")
}

fn solver_config() -> SolverConfig {
    SolverConfig {
        max_iterations: SWEEPS,
        rel_tolerance: 0.0,
        ..SolverConfig::default()
    }
}

fn run_solver(obs: &ObservedMatrix) -> SolveResult {
    als_solve(obs, RANK, &solver_config(), 7).expect("solvable instance")
}

/// Ambient execution: the rayon pool when the `parallel` feature is on, the
/// plain sequential loops otherwise.
fn bench_ambient(c: &mut Criterion) {
    let mut group = c.benchmark_group("als_solve");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    for n in SIZES {
        let obs = bench_instance(n, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &obs, |b, obs| {
            b.iter(|| black_box(run_solver(obs)));
        });
    }
    group.finish();
}

/// The same workload forced onto a one-thread rayon pool; comparing against
/// `als_solve` above shows the parallel speed-up net of pool overhead.
#[cfg(feature = "parallel")]
fn bench_one_thread(c: &mut Criterion) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("one-thread pool");
    let mut group = c.benchmark_group("als_solve_one_thread");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    for n in SIZES {
        let obs = bench_instance(n, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &obs, |b, obs| {
            b.iter(|| pool.install(|| black_box(run_solver(obs))));
        });
    }
    group.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench_one_thread(_c: &mut Criterion) {}

criterion_group!(benches, bench_ambient, bench_one_thread);
criterion_main!(benches);
