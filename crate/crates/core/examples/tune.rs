use spikemix_core::analysis::{
    adjusted_rand, candidate_partitions, compare_similarity, occupied_distribution, pairwise_similarity,
    pear_optimal, Partition,
};
use spikemix_core::dist::SimplexVector;
use spikemix_core::dpm::{run_dpm, RunDpmConfig};
use spikemix_core::exec::ExecMode;
use spikemix_core::linalg::SpdMatrix;
use spikemix_core::niw::default_hyperparams;
use spikemix_core::ofm::{run_ofm, RunOfmConfig, TemperingLadder};
use spikemix_core::synthetic::{generate_synthetic_mixture, SyntheticSpec};
use spikemix_core::RngStream;

fn base_spec(n: usize, sep: f64, frac: f64, scale: f64) -> SyntheticSpec {
    let weights = SimplexVector::new(vec![0.35, 0.30, 0.20, 0.15]).unwrap();
    let means = vec![
        vec![0.0, 0.0, 0.0, 0.0],
        vec![8.0 * sep, 0.0, 4.0 * sep, -3.0 * sep],
        vec![-6.0 * sep, 7.0 * sep, -2.0 * sep, 2.0 * sep],
        vec![3.0 * sep, -8.0 * sep, 6.0 * sep, 5.0 * sep],
    ];
    let covariances = vec![
        SpdMatrix::identity(4),
        SpdMatrix::identity(4).scaled(1.1).unwrap(),
        SpdMatrix::identity(4).scaled(0.7).unwrap(),
        SpdMatrix::identity(4).scaled(0.9).unwrap(),
    ];
    SyntheticSpec::new(weights, means, covariances, n, frac, scale).unwrap()
}

fn main() {
    let _ = base_spec; // earlier scans
    let args: Vec<String> = std::env::args().collect();
    let lo: f64 = args.get(1).map_or(3.3, |s| s.parse().unwrap());
    let hi: f64 = args.get(2).map_or(4.5, |s| s.parse().unwrap());
    let frac: f64 = args.get(3).map_or(0.05, |s| s.parse().unwrap());
    for data_seed in [100u64, 101, 102] {
        println!("===== data seed {data_seed} shell [{lo}, {hi}] frac {frac}");
        for seed in [1u64, 2, 3] {
            let (x, truth) = spikemix_core::synthetic::generate_heavy_tailed_mixture(
                300,
                frac,
                lo,
                hi,
                &mut RngStream::new(data_seed, 0),
            )
            .unwrap();
            let hyper = default_hyperparams(x.column_means(), &x.covariance()).unwrap();

            let ofm_cfg = RunOfmConfig {
                kstar: 10,
                hyper: hyper.clone(),
                ladder: TemperingLadder::default_ladder(),
                iterations: 10_000,
                burn_in: 5_000,
                thin: 1,
                seed,
                exec: ExecMode::default(),
            };
            let ofm_trace = run_ofm(&x, &ofm_cfg).unwrap();
            let ofm_dist = occupied_distribution(&ofm_trace).unwrap();
            let ofm_width = ofm_dist.support_width(0.01);

            let dpm_cfg = RunDpmConfig {
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
            let dpm_trace = run_dpm(&x, &dpm_cfg).unwrap();
            let dpm_dist = occupied_distribution(&dpm_trace).unwrap();
            let dpm_width = dpm_dist.support_width(0.01);

            let p_dpm = pairwise_similarity(&dpm_trace).unwrap();
            let cands = candidate_partitions(&dpm_trace, &p_dpm).unwrap();
            let dpm_part = pear_optimal(&p_dpm, &cands).unwrap();
            let truth_part = Partition::new(&truth);
            let ari = adjusted_rand(&dpm_part, &truth_part).unwrap();
            let p_ofm = pairwise_similarity(&ofm_trace).unwrap();
            let (_, mad) = compare_similarity(&p_ofm, &p_dpm).unwrap();

            let c3 = ofm_dist.modal_count() == 4 && ofm_dist.table.get(&4).copied().unwrap_or(0.0) >= 0.8;
            let c4 = ari >= 0.9 && dpm_width > ofm_width;
            let c5 = mad <= 0.1;
            println!(
                "seed {seed}: OFM {:?} w{ofm_width} | DPM {:?} w{dpm_width} | ARI {ari:.3} mad {mad:.4} | c3 {c3} c4 {c4} c5 {c5}",
                ofm_dist.table, dpm_dist.table
            );
        }
    }
}
