//! Sequential vs parallel throughput of the hot loops: tempered OFM
//! sweeps, DPM slice sweeps, and similarity accumulation. With the
//! `parallel` feature disabled only the sequential path is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spikemix_core::analysis::pairwise_similarity_mode;
use spikemix_core::dpm::{DpmSampler, RunDpmConfig};
use spikemix_core::exec::ExecMode;
use spikemix_core::niw::default_hyperparams;
use spikemix_core::ofm::{OfmSampler, RunOfmConfig, TemperingLadder};
use spikemix_core::synthetic::bundled_demo_dataset;
use spikemix_core::trace::AllocationTrace;

fn modes() -> Vec<(&'static str, ExecMode)> {
    let mut modes = vec![("sequential", ExecMode::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", ExecMode::Parallel));
    modes
}

fn bench_ofm_sweep(c: &mut Criterion) {
    let (x, _) = bundled_demo_dataset(300, 7);
    let hyper = default_hyperparams(x.column_means(), &x.covariance()).unwrap();
    let mut group = c.benchmark_group("ofm_sweep");
    group.sample_size(10);
    for (name, mode) in modes() {
        let cfg = RunOfmConfig {
            kstar: 10,
            hyper: hyper.clone(),
            ladder: TemperingLadder::default_ladder(),
            iterations: 10,
            burn_in: 1,
            thin: 1,
            seed: 1,
            exec: mode,
        };
        let mut sampler = OfmSampler::new(&x, cfg).unwrap();
        for _ in 0..20 {
            sampler.step().unwrap();
        }
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sampler.step().unwrap())
        });
    }
    group.finish();
}

fn bench_dpm_sweep(c: &mut Criterion) {
    let (x, _) = bundled_demo_dataset(300, 7);
    let hyper = default_hyperparams(x.column_means(), &x.covariance()).unwrap();
    let mut group = c.benchmark_group("dpm_sweep");
    group.sample_size(10);
    for (name, mode) in modes() {
        let cfg = RunDpmConfig {
            k_init: 10,
            hyper: hyper.clone(),
            iterations: 10,
            burn_in: 1,
            thin: 1,
            seed: 1,
            moves_per_sweep: 2,
            exec: mode,
            check_invariants: false,
        };
        let mut sampler = DpmSampler::new(&x, cfg).unwrap();
        for _ in 0..50 {
            sampler.step().unwrap();
        }
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sampler.step().unwrap())
        });
    }
    group.finish();
}

fn bench_pairwise_similarity(c: &mut Criterion) {
    let (x, _) = bundled_demo_dataset(300, 7);
    let hyper = default_hyperparams(x.column_means(), &x.covariance()).unwrap();
    let cfg = RunDpmConfig {
        k_init: 10,
        hyper,
        iterations: 2_200,
        burn_in: 200,
        thin: 1,
        seed: 1,
        moves_per_sweep: 2,
        exec: ExecMode::default(),
        check_invariants: false,
    };
    let trace: AllocationTrace = spikemix_core::dpm::run_dpm(&x, &cfg).unwrap();
    let mut group = c.benchmark_group("pairwise_similarity");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pairwise_similarity_mode(&trace, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ofm_sweep, bench_dpm_sweep, bench_pairwise_similarity);
criterion_main!(benches);
