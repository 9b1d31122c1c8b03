//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantities (visible under
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria 3-5 and 8 share one bundled dataset and one set of sampler
//! runs, cached behind a mutex so the suite costs three OFM and three
//! DPM runs total regardless of test order.

use spikemix_core::analysis::{
    adjusted_rand, candidate_partitions, compare_similarity, occupied_distribution, pairwise_similarity,
    pear_optimal, pear_score, Partition, SimilarityMatrix,
};
use spikemix_core::data::FeatureMatrix;
use spikemix_core::dpm::{DpmSampler, RunDpmConfig};
use spikemix_core::exec::ExecMode;
use spikemix_core::linalg::SpdMatrix;
use spikemix_core::niw::{default_hyperparams, NiwHyperparams};
use spikemix_core::ofm::{run_ofm, swap_log_acceptance, OfmSampler, OfmState, RunOfmConfig, TemperingLadder};
use spikemix_core::synthetic::bundled_demo_dataset;
use spikemix_core::trace::AllocationTrace;
use spikemix_core::RngStream;
use std::sync::{Mutex, OnceLock};

const SAMPLER_SEEDS: [u64; 3] = [11, 12, 13];
const DATA_SEED: u64 = 101;

struct SharedRuns {
    x: FeatureMatrix,
    truth: Vec<usize>,
    ofm_traces: Vec<AllocationTrace>,
    dpm_traces: Vec<AllocationTrace>,
}

fn shared_runs() -> &'static SharedRuns {
    static RUNS: OnceLock<Mutex<()>> = OnceLock::new();
    static RESULT: OnceLock<SharedRuns> = OnceLock::new();
    let guard = RUNS.get_or_init(|| Mutex::new(())).lock().unwrap();
    let runs = RESULT.get_or_init(|| {
        let (x, truth) = bundled_demo_dataset(300, DATA_SEED);
        let hyper = default_hyperparams(x.column_means(), &x.covariance()).unwrap();
        let ofm_traces = SAMPLER_SEEDS
            .iter()
            .map(|&seed| {
                let cfg = RunOfmConfig {
                    kstar: 10,
                    hyper: hyper.clone(),
                    ladder: TemperingLadder::default_ladder(),
                    iterations: 10_000,
                    burn_in: 5_000,
                    thin: 1,
                    seed,
                    exec: ExecMode::default(),
                };
                run_ofm(&x, &cfg).unwrap()
            })
            .collect();
        let dpm_traces = SAMPLER_SEEDS
            .iter()
            .map(|&seed| {
                let cfg = RunDpmConfig {
                    k_init: 10,
                    hyper: hyper.clone(),
                    iterations: 30_000,
                    burn_in: 10_000,
                    thin: 1,
                    seed,
                    moves_per_sweep: 2,
                    exec: ExecMode::default(),
                    check_invariants: true,
                };
                spikemix_core::dpm::run_dpm(&x, &cfg).unwrap()
            })
            .collect();
        SharedRuns { x, truth, ofm_traces, dpm_traces }
    });
    drop(guard);
    runs
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance plus its asymptotic standard error from the fourth
/// central moment.
fn variance_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (var, ((m4 - var * var).max(0.0) / n).sqrt())
}

/// Batch-means standard error for serially correlated draws.
fn batch_mean_se(xs: &[f64], batches: usize) -> f64 {
    let per = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
        .collect();
    let (_, se) = mean_and_se(&means);
    se
}

// ------------------------------------------------------------------ 1

#[test]
fn criterion_1_conjugate_oracle_equivalence() {
    // single univariate cluster, every draw from the exact conditional
    let mut data_rng = RngStream::new(42, 0);
    let rows: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            vec![2.0 + 1.5 * rand::Rng::sample::<f64, _>(&mut data_rng, rand_distr::StandardNormal)]
        })
        .collect();
    let x = FeatureMatrix::from_rows(rows.clone()).unwrap();
    let hyper = NiwHyperparams::new(vec![0.0], 0.5, 6.0, SpdMatrix::identity(1)).unwrap();

    // closed-form conjugate posterior for r = 1
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let post = hyper.posterior(&refs).unwrap();
    let (b_n, n_n, c_n, scale_n) = (post.b0[0], post.n0, post.c0, post.scale.mat()[(0, 0)]);
    // sigma^2 ~ InvGamma(c_n/2, C_n/2); mu | sigma^2 ~ N(b_n, sigma^2/N_n)
    let want_mu_mean = b_n;
    let want_sigma2_mean = scale_n / (c_n - 2.0);
    let a = c_n / 2.0;
    let b = scale_n / 2.0;
    let want_sigma2_var = b * b / ((a - 1.0) * (a - 1.0) * (a - 2.0));
    let want_mu_var = want_sigma2_mean / n_n;

    let draws = 100_000;
    let mut rng = RngStream::new(7, 1);
    let mut state = OfmState::from_prior(2, &hyper, 1.0, &mut rng).unwrap();
    state.z = vec![0; 50];
    state.refresh_counts();
    let mut mu = Vec::with_capacity(draws);
    let mut sigma2 = Vec::with_capacity(draws);
    for _ in 0..draws {
        spikemix_core::ofm::update_components(&mut state, &x, &hyper, &mut rng).unwrap();
        mu.push(state.components[0].mu[0]);
        sigma2.push(state.components[0].sigma.mat()[(0, 0)]);
    }

    let (mu_mean, mu_mean_se) = mean_and_se(&mu);
    let (mu_var, mu_var_se) = variance_and_se(&mu);
    let (s2_mean, s2_mean_se) = mean_and_se(&sigma2);
    let (s2_var, s2_var_se) = variance_and_se(&sigma2);
    assert!(
        (mu_mean - want_mu_mean).abs() <= 3.0 * mu_mean_se,
        "E[mu] {mu_mean} vs {want_mu_mean} (se {mu_mean_se})"
    );
    assert!(
        (mu_var - want_mu_var).abs() <= 3.0 * mu_var_se,
        "Var[mu] {mu_var} vs {want_mu_var} (se {mu_var_se})"
    );
    assert!(
        (s2_mean - want_sigma2_mean).abs() <= 3.0 * s2_mean_se,
        "E[sigma2] {s2_mean} vs {want_sigma2_mean} (se {s2_mean_se})"
    );
    assert!(
        (s2_var - want_sigma2_var).abs() <= 3.0 * s2_var_se,
        "Var[sigma2] {s2_var} vs {want_sigma2_var} (se {s2_var_se})"
    );
    println!(
        "acceptance criterion 1 (conjugate oracle): PASS  E[mu] {mu_mean:.4}~{want_mu_mean:.4}  Var[mu] {mu_var:.5}~{want_mu_var:.5}  E[s2] {s2_mean:.4}~{want_sigma2_mean:.4}  Var[s2] {s2_var:.5}~{want_sigma2_var:.5}"
    );
}

// ------------------------------------------------------------------ 2

#[test]
fn criterion_2a_ofm_prior_invariance() {
    let kstar = 6;
    let alpha0 = 0.05;
    let hyper = NiwHyperparams::new(vec![0.0; 2], 0.5, 5.0, SpdMatrix::identity(2)).unwrap();
    let x = FeatureMatrix::empty(2).unwrap();
    let cfg = RunOfmConfig {
        kstar,
        hyper,
        ladder: TemperingLadder::new(vec![alpha0, 0.5, 2.0], 5).unwrap(),
        iterations: 100_000,
        burn_in: 0,
        thin: 1,
        seed: 2024,
        exec: ExecMode::default(),
    };
    let mut sampler = OfmSampler::new(&x, cfg).unwrap();
    let sweeps = 100_000;
    let mut pi1 = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        sampler.step().unwrap();
        pi1.push(sampler.inference_state().log_pi[0].exp());
    }
    let k = kstar as f64;
    let want_mean = 1.0 / k;
    let want_var = (k - 1.0) / (k * k * (k * alpha0 + 1.0));
    let mean = pi1.iter().sum::<f64>() / sweeps as f64;
    let mean_se = batch_mean_se(&pi1, 100);
    let centered: Vec<f64> = pi1.iter().map(|&p| (p - mean) * (p - mean)).collect();
    let var = centered.iter().sum::<f64>() / (sweeps as f64 - 1.0);
    let var_se = batch_mean_se(&centered, 100);
    assert!((mean - want_mean).abs() <= 3.0 * mean_se, "E[pi1] {mean} vs {want_mean} (se {mean_se})");
    assert!((var - want_var).abs() <= 3.0 * var_se, "Var[pi1] {var} vs {want_var} (se {var_se})");
    println!(
        "acceptance criterion 2a (OFM prior invariance): PASS  E[pi1] {mean:.4}~{want_mean:.4}  Var[pi1] {var:.5}~{want_var:.5}"
    );
}

#[test]
fn criterion_2b_dpm_prior_invariance() {
    let hyper = NiwHyperparams::new(vec![0.0; 2], 0.5, 5.0, SpdMatrix::identity(2)).unwrap();
    let x = FeatureMatrix::empty(2).unwrap();
    let cfg = RunDpmConfig {
        k_init: 5,
        hyper,
        iterations: 100_000,
        burn_in: 0,
        thin: 1,
        seed: 4048,
        moves_per_sweep: 2,
        exec: ExecMode::default(),
        check_invariants: true,
    };
    let mut sampler = DpmSampler::new(&x, cfg).unwrap();
    let sweeps = 100_000;
    let mut ms = Vec::with_capacity(sweeps);
    let mut sticks_u = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        sampler.step().unwrap();
        let state = sampler.state();
        ms.push(state.m);
        // v1 | m ~ Beta(1, m) exactly when (1 - v1)^m ~ Uniform(0,1)
        sticks_u.push((1.0 - state.v[0]).powf(state.m));
    }
    let m_mean = ms.iter().sum::<f64>() / sweeps as f64;
    let m_mean_se = batch_mean_se(&ms, 100);
    let m_centered: Vec<f64> = ms.iter().map(|&m| (m - m_mean) * (m - m_mean)).collect();
    let m_var = m_centered.iter().sum::<f64>() / (sweeps as f64 - 1.0);
    let m_var_se = batch_mean_se(&m_centered, 100);
    assert!((m_mean - 1.0).abs() <= 3.0 * m_mean_se, "E[m] {m_mean} (se {m_mean_se})");
    assert!((m_var - 1.0).abs() <= 3.0 * m_var_se, "Var[m] {m_var} (se {m_var_se})");

    let u_mean = sticks_u.iter().sum::<f64>() / sweeps as f64;
    let u_mean_se = batch_mean_se(&sticks_u, 100);
    let u_centered: Vec<f64> = sticks_u.iter().map(|&u| (u - u_mean) * (u - u_mean)).collect();
    let u_var = u_centered.iter().sum::<f64>() / (sweeps as f64 - 1.0);
    let u_var_se = batch_mean_se(&u_centered, 100);
    assert!((u_mean - 0.5).abs() <= 3.0 * u_mean_se, "E[(1-v1)^m] {u_mean} (se {u_mean_se})");
    assert!(
        (u_var - 1.0 / 12.0).abs() <= 3.0 * u_var_se,
        "Var[(1-v1)^m] {u_var} (se {u_var_se})"
    );
    println!(
        "acceptance criterion 2b (DPM prior invariance): PASS  E[m] {m_mean:.4}~1  Var[m] {m_var:.4}~1  E[(1-v1)^m] {u_mean:.4}~0.5"
    );
}

// ------------------------------------------------------------------ 3

#[test]
fn criterion_3_ofm_emptying() {
    let runs = shared_runs();
    for (trace, &seed) in runs.ofm_traces.iter().zip(&SAMPLER_SEEDS) {
        let dist = occupied_distribution(trace).unwrap();
        let p4 = dist.table.get(&4).copied().unwrap_or(0.0);
        assert_eq!(dist.modal_count(), 4, "seed {seed}: modal count {:?}", dist.table);
        assert!(p4 >= 0.8, "seed {seed}: p(4 occupied) = {p4} < 0.8 ({:?})", dist.table);
        // excess components stay empty on average
        let mean_occupied: f64 =
            trace.occupied_counts.iter().map(|&c| c as f64).sum::<f64>() / trace.len() as f64;
        assert!(mean_occupied < 6.0, "seed {seed}: mean occupied {mean_occupied}");
        println!("acceptance criterion 3 (OFM emptying, seed {seed}): PASS  p(4) = {p4:.3}, modal 4, mean occupied {mean_occupied:.2}");
    }
}

// ------------------------------------------------------------------ 4

#[test]
fn criterion_4_dpm_recovery_and_spread() {
    let runs = shared_runs();
    let truth = Partition::new(&runs.truth);
    for ((dpm_trace, ofm_trace), &seed) in runs.dpm_traces.iter().zip(&runs.ofm_traces).zip(&SAMPLER_SEEDS) {
        let p = pairwise_similarity(dpm_trace).unwrap();
        let candidates = candidate_partitions(dpm_trace, &p).unwrap();
        let best = pear_optimal(&p, &candidates).unwrap();
        let ari = adjusted_rand(&best, &truth).unwrap();
        assert!(ari >= 0.9, "seed {seed}: PEAR partition ARI {ari} < 0.9");

        let dpm_width = occupied_distribution(dpm_trace).unwrap().support_width(0.01);
        let ofm_width = occupied_distribution(ofm_trace).unwrap().support_width(0.01);
        assert!(
            dpm_width > ofm_width,
            "seed {seed}: DPM width {dpm_width} not strictly above OFM width {ofm_width}"
        );
        println!(
            "acceptance criterion 4 (DPM recovery and spread, seed {seed}): PASS  ARI {ari:.3}, width DPM {dpm_width} > OFM {ofm_width}"
        );
    }
}

// ------------------------------------------------------------------ 5

#[test]
fn criterion_5_posterior_agreement() {
    let runs = shared_runs();
    for ((ofm_trace, dpm_trace), &seed) in runs.ofm_traces.iter().zip(&runs.dpm_traces).zip(&SAMPLER_SEEDS) {
        let p_ofm = pairwise_similarity(ofm_trace).unwrap();
        let p_dpm = pairwise_similarity(dpm_trace).unwrap();
        let (_, mean_abs_diff) = compare_similarity(&p_ofm, &p_dpm).unwrap();
        assert!(mean_abs_diff <= 0.1, "seed {seed}: mean |P_ofm - P_dpm| = {mean_abs_diff}");
        println!("acceptance criterion 5 (posterior agreement, seed {seed}): PASS  mean |dP| = {mean_abs_diff:.4}");
    }
}

// ------------------------------------------------------------------ 6

/// Every set partition of n elements, as restricted-growth strings.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn recurse(labels: &mut Vec<usize>, pos: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if pos == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max_used + 1 {
            labels[pos] = l;
            recurse(labels, pos + 1, max_used.max(l), out);
        }
    }
    if n > 0 {
        recurse(&mut labels, 1, 0, &mut out);
    }
    out
}

/// Oracle PEAR evaluation, written against the definition rather than
/// the library accumulation: explicit pair loops and a separate
/// degenerate-denominator fallback.
fn pear_oracle(labels: &[usize], p: &SimilarityMatrix) -> f64 {
    let n = labels.len();
    let mut cp = 0.0f64;
    let mut c_total = 0.0f64;
    let mut p_total = 0.0f64;
    let mut pairs = 0.0f64;
    let mut agreement = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if j <= i {
                continue;
            }
            pairs += 1.0;
            let same = labels[i] == labels[j];
            let pij = p.get(i, j);
            p_total += pij;
            if same {
                c_total += 1.0;
                cp += pij;
                agreement += pij;
            } else {
                agreement += 1.0 - pij;
            }
        }
    }
    let expected = c_total * p_total / pairs;
    let denom = 0.5 * (c_total + p_total) - expected;
    if denom == 0.0 {
        agreement / pairs
    } else {
        (cp - expected) / denom
    }
}

#[test]
fn criterion_6_pear_brute_force_equivalence() {
    let mut rng = RngStream::new(606, 0);
    let mut trials = 0;
    for n in 4..=8usize {
        let partitions: Vec<Partition> = all_partitions(n).iter().map(|l| Partition::new(l)).collect();
        for _ in 0..20 {
            trials += 1;
            // random symmetric similarity with unit diagonal
            let mut p = vec![0.0; n * n];
            for i in 0..n {
                p[i * n + i] = 1.0;
                for j in (i + 1)..n {
                    let v: f64 = rand::Rng::sample(&mut rng, rand_distr::Open01);
                    p[i * n + j] = v;
                    p[j * n + i] = v;
                }
            }
            let p = SimilarityMatrix::from_values(n, p).unwrap();
            let got = pear_optimal(&p, &partitions).unwrap();

            // exhaustive oracle with the same tie rule
            let mut best: Option<(f64, usize, usize)> = None;
            for (idx, cand) in partitions.iter().enumerate() {
                let score = pear_oracle(cand.labels(), &p);
                let better = match best {
                    None => true,
                    Some((s, k, _)) => score > s || (score == s && cand.num_clusters() < k),
                };
                if better {
                    best = Some((score, cand.num_clusters(), idx));
                }
            }
            let want = &partitions[best.unwrap().2];
            assert_eq!(&got, want, "n = {n}");
            let diff = (pear_score(&got, &p).unwrap() - pear_oracle(got.labels(), &p)).abs();
            assert!(diff < 1e-10, "oracle and implementation disagree on the optimum value by {diff}");
        }
    }
    println!("acceptance criterion 6 (PEAR brute force): PASS  {trials} random similarity matrices, n = 4..8");
}

// ------------------------------------------------------------------ 7

/// Lanczos log-gamma, local to the oracle.
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, &g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Full symmetric Dirichlet log-density including normalizing constant.
fn dirichlet_logpdf_symmetric(log_pi: &[f64], alpha: f64) -> f64 {
    let k = log_pi.len() as f64;
    let norm = ln_gamma(k * alpha) - k * ln_gamma(alpha);
    norm + (alpha - 1.0) * log_pi.iter().sum::<f64>()
}

#[test]
fn criterion_7_swap_move_correctness() {
    let hyper = NiwHyperparams::new(vec![0.0], 1.0, 3.0, SpdMatrix::identity(1)).unwrap();
    let mut rng = RngStream::new(707, 0);
    for trial in 0..1000 {
        let k = 2 + (rand::Rng::sample::<f64, _>(&mut rng, rand_distr::Open01) * 9.0) as usize;
        let alpha_a = 0.001 + rand::Rng::sample::<f64, _>(&mut rng, rand_distr::Open01) * 2.0;
        let alpha_b = 0.001 + rand::Rng::sample::<f64, _>(&mut rng, rand_distr::Open01) * 5.0;
        let mut state_a = OfmState::from_prior(k, &hyper, alpha_a, &mut rng).unwrap();
        let mut state_b = OfmState::from_prior(k, &hyper, alpha_b, &mut rng).unwrap();
        // random weight refreshes decouple the states from their priors
        spikemix_core::ofm::update_weights(&mut state_a, &mut rng).unwrap();
        spikemix_core::ofm::update_weights(&mut state_b, &mut rng).unwrap();

        let got = swap_log_acceptance(&state_a, &state_b, alpha_a, alpha_b).unwrap();
        // independently coded ratio of the four symmetric Dirichlet densities
        let want = dirichlet_logpdf_symmetric(&state_a.log_pi, alpha_b)
            + dirichlet_logpdf_symmetric(&state_b.log_pi, alpha_a)
            - dirichlet_logpdf_symmetric(&state_a.log_pi, alpha_a)
            - dirichlet_logpdf_symmetric(&state_b.log_pi, alpha_b);
        assert!(
            (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
            "trial {trial}: {got} vs {want}"
        );

        let reverse = swap_log_acceptance(&state_b, &state_a, alpha_a, alpha_b).unwrap();
        assert_eq!(got, -reverse, "antisymmetry must hold exactly");
    }
    println!("acceptance criterion 7 (swap-move correctness): PASS  1000 random states within 1e-10, antisymmetry exact");
}

// ------------------------------------------------------------------ 8

#[test]
fn criterion_8_slice_structural_invariants() {
    let (x, _) = bundled_demo_dataset(300, DATA_SEED);
    let hyper = default_hyperparams(x.column_means(), &x.covariance()).unwrap();
    let cfg = RunDpmConfig {
        k_init: 10,
        hyper,
        iterations: 3_000,
        burn_in: 1_000,
        thin: 1,
        seed: 8088,
        moves_per_sweep: 2,
        exec: ExecMode::default(),
        check_invariants: false, // this test performs the checks itself
    };
    let mut sampler = DpmSampler::new(&x, cfg).unwrap();
    let mut max_mass_err = 0.0f64;
    for sweep in 1..=3_000usize {
        sampler.step().unwrap();
        if sweep <= 1_000 {
            continue;
        }
        let state = sampler.state();
        assert!(state.slice_invariant_holds(), "sweep {sweep}: u_i >= pi(z_i) somewhere");
        let err = state.mass_identity_error();
        assert!(err <= 1e-9, "sweep {sweep}: mass identity off by {err:e}");
        max_mass_err = max_mass_err.max(err);
        assert!(
            state.z.iter().all(|&z| z < state.k_rep()),
            "sweep {sweep}: allocation beyond represented sticks"
        );
    }
    // and the recorded traces from the shared runs stay within bounds
    let runs = shared_runs();
    for trace in &runs.dpm_traces {
        for (draw, &k_rep) in trace.draws.iter().zip(&trace.represented_counts) {
            assert!(draw.iter().all(|&z| z < k_rep));
        }
    }
    println!(
        "acceptance criterion 8 (slice invariants): PASS  2000 checked sweeps, max mass-identity error {max_mass_err:.2e}"
    );
}
