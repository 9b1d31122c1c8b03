//! The five pipeline commands: simulate, pca, run, analyze, compare.
//!
//! Commands never mutate their inputs; every artifact lands in the
//! configured output directory and is byte-identical across reruns with
//! the same inputs and seeds. Wall-clock timings go to stderr only.

use crate::config::{Model, RunConfig};
use crate::kv::KvMap;
use crate::report;
use crate::svg;
use anyhow::{anyhow, bail, Context, Result};
use spikemix_core::analysis::{
    candidate_partitions, compare_similarity, occupied_distribution, ofm_modal_partition, pairwise_similarity,
    pear_optimal, Partition, SimilarityMatrix,
};
use spikemix_core::data::{
    load_features, load_waveforms, write_explained_variance_csv, write_features_csv, FeatureMatrix,
};
use spikemix_core::dist::SimplexVector;
use spikemix_core::dpm::{run_dpm, RunDpmConfig};
use spikemix_core::exec::ExecMode;
use spikemix_core::linalg::{Mat, SpdMatrix};
use spikemix_core::ofm::{run_ofm, RunOfmConfig, TemperingLadder};
use spikemix_core::pca::pca_fit;
use spikemix_core::synthetic::{generate_synthetic_mixture, generate_synthetic_waveforms, SyntheticSpec};
use spikemix_core::trace::AllocationTrace;
use spikemix_core::RngStream;
use std::path::{Path, PathBuf};

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

fn labels_csv(labels: &[usize]) -> String {
    let mut s = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, l));
    }
    s
}

fn load_label_column(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue; // header
        }
        let field = line
            .split(',')
            .nth(1)
            .ok_or_else(|| anyhow!("{}, row {}: expected `index,label`", path.display(), idx + 1))?;
        labels.push(
            field
                .trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("{}, row {}: bad label {field:?}", path.display(), idx + 1))?,
        );
    }
    if labels.is_empty() {
        bail!("{}: no label rows", path.display());
    }
    Ok(labels)
}

/// Observation order for heatmaps: first feature ascending, ties by
/// index (stable sort).
fn pc1_order(x: &FeatureMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.n()).collect();
    order.sort_by(|&a, &b| x.row(a)[0].partial_cmp(&x.row(b)[0]).unwrap());
    order
}

fn similarity_csv(p: &SimilarityMatrix) -> String {
    let mut s = String::new();
    for i in 0..p.n() {
        let row: Vec<String> = (0..p.n()).map(|j| format!("{}", p.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- simulate

pub fn cmd_simulate(spec_text: &str, origin: &str, seed: u64, out: &Path) -> Result<()> {
    let kv = if spec_text.trim_start().starts_with('{') {
        KvMap::parse_json(spec_text)
    } else {
        KvMap::parse_flat(spec_text)
    }
    .with_context(|| format!("parsing simulation spec {origin}"))?;
    match kv.get("schema") {
        Some("1") => {}
        Some(v) => bail!("{origin}: unsupported schema version {v:?}"),
        None => bail!("{origin}: missing required `schema` entry"),
    }
    ensure_out_dir(out)?;
    let mut rng = RngStream::new(seed, 0);
    match kv.get("kind") {
        Some("mixture") => {
            let spec = mixture_spec_from_kv(&kv)?;
            let (x, labels) = generate_synthetic_mixture(&spec, &mut rng).map_err(|e| anyhow!("{e}"))?;
            let mut buf = Vec::new();
            write_features_csv(&x, &mut buf)?;
            write_atomic(&out.join("features.csv"), &buf)?;
            write_atomic(&out.join("labels.csv"), labels_csv(&labels).as_bytes())?;
            eprintln!("simulate: wrote {} observations x {} features", x.n(), x.r());
        }
        Some("waveforms") => {
            let (w, labels) = waveforms_from_kv(&kv, &mut rng)?;
            let mut buf = String::new();
            for i in 0..w.n() {
                let row: Vec<String> = w.row(i).iter().map(|v| format!("{v}")).collect();
                buf.push_str(&row.join(","));
                buf.push('\n');
            }
            write_atomic(&out.join("waveforms.csv"), buf.as_bytes())?;
            write_atomic(&out.join("labels.csv"), labels_csv(&labels).as_bytes())?;
            eprintln!("simulate: wrote {} waveforms x {} samples", w.n(), w.s());
        }
        other => bail!("{origin}: `kind` must be `mixture` or `waveforms`, got {other:?}"),
    }
    Ok(())
}

fn mixture_spec_from_kv(kv: &KvMap) -> Result<SyntheticSpec> {
    let n: usize = kv
        .parse_scalar("n")?
        .ok_or_else(|| anyhow!("mixture spec needs `n`"))?;
    let weights = kv
        .parse_vec_f64("weights")?
        .ok_or_else(|| anyhow!("mixture spec needs `weights`"))?;
    let k = weights.len();
    let weights = SimplexVector::new(weights).map_err(|e| anyhow!("weights: {e}"))?;
    let mut means = Vec::with_capacity(k);
    let mut covs = Vec::with_capacity(k);
    for c in 1..=k {
        let mean = kv
            .parse_vec_f64(&format!("mean_{c}"))?
            .ok_or_else(|| anyhow!("mixture spec needs `mean_{c}`"))?;
        let cov_rows = kv
            .parse_matrix(&format!("cov_{c}"))?
            .ok_or_else(|| anyhow!("mixture spec needs `cov_{c}`"))?;
        let r = cov_rows.len();
        if cov_rows.iter().any(|row| row.len() != r) {
            bail!("cov_{c} must be square");
        }
        let flat: Vec<f64> = cov_rows.into_iter().flatten().collect();
        covs.push(SpdMatrix::new(Mat::from_vec(r, r, flat)).map_err(|e| anyhow!("cov_{c}: {e}"))?);
        means.push(mean);
    }
    let outlier_fraction = kv.parse_scalar::<f64>("outlier_fraction")?.unwrap_or(0.0);
    let outlier_scale = kv.parse_scalar::<f64>("outlier_scale")?.unwrap_or(2.0);
    SyntheticSpec::new(weights, means, covs, n, outlier_fraction, outlier_scale).map_err(|e| anyhow!("{e}"))
}

fn waveforms_from_kv(kv: &KvMap, rng: &mut RngStream) -> Result<(spikemix_core::data::WaveformMatrix, Vec<usize>)> {
    let counts_f = kv
        .parse_vec_f64("counts")?
        .ok_or_else(|| anyhow!("waveform spec needs `counts`"))?;
    let counts: Vec<usize> = counts_f.iter().map(|&c| c as usize).collect();
    let noise_sd: f64 = kv.parse_scalar("noise_sd")?.unwrap_or(0.0);
    let mut templates = Vec::new();
    for t in 1..=counts.len() {
        templates.push(
            kv.parse_vec_f64(&format!("template_{t}"))?
                .ok_or_else(|| anyhow!("waveform spec needs `template_{t}`"))?,
        );
    }
    let s = templates[0].len();
    if templates.iter().any(|t| t.len() != s) {
        bail!("templates must share one length");
    }
    let mat = Mat::from_rows(&templates);
    generate_synthetic_waveforms(&mat, &counts, noise_sd, rng).map_err(|e| anyhow!("{e}"))
}

// ---------------------------------------------------------------- pca

#[allow(clippy::too_many_arguments)]
pub fn cmd_pca(
    input: &Path,
    has_header: bool,
    r: usize,
    center: bool,
    robust_scale: bool,
    standardize: bool,
    out: &Path,
) -> Result<()> {
    let w = load_waveforms(input, has_header).map_err(|e| anyhow!("{e}"))?;
    let (_, mut features) = pca_fit(&w, r, center, robust_scale).map_err(|e| anyhow!("{e}"))?;
    if standardize {
        features = standardize_columns(&features)?;
    }
    ensure_out_dir(out)?;
    let mut buf = Vec::new();
    write_features_csv(&features, &mut buf)?;
    write_atomic(&out.join("features.csv"), &buf)?;
    let ev = features.explained_variance().unwrap_or(&[]).to_vec();
    let mut ev_buf = Vec::new();
    write_explained_variance_csv(&ev, &mut ev_buf)?;
    write_atomic(&out.join("explained_variance.csv"), &ev_buf)?;
    write_atomic(&out.join("pc_histograms.svg"), svg::histogram_panels_svg(&features, 30).as_bytes())?;
    println!("component,proportion,cumulative");
    let mut cum = 0.0;
    for (i, p) in ev.iter().enumerate() {
        cum += p;
        println!("{},{p:.4},{cum:.4}", i + 1);
    }
    Ok(())
}

fn standardize_columns(x: &FeatureMatrix) -> Result<FeatureMatrix> {
    let n = x.n();
    let r = x.r();
    let means = x.column_means();
    let mut sds = vec![0.0; r];
    for i in 0..n {
        for j in 0..r {
            let d = x.row(i)[j] - means[j];
            sds[j] += d * d;
        }
    }
    for sd in sds.iter_mut() {
        *sd = (*sd / (n as f64 - 1.0).max(1.0)).sqrt();
        if *sd == 0.0 {
            bail!("cannot standardize a zero-variance score column");
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..r).map(|j| x.row(i)[j] / sds[j]).collect())
        .collect();
    let ev = x.explained_variance().map(|e| e.to_vec());
    let mut out = FeatureMatrix::from_rows(rows).map_err(|e| anyhow!("{e}"))?;
    if let Some(ev) = ev {
        out = out.with_explained_variance(ev).map_err(|e| anyhow!("{e}"))?;
    }
    Ok(out)
}

// ---------------------------------------------------------------- run

pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<()> {
    config.validate()?;
    let features = load_features(Path::new(&config.input), config.has_header).map_err(|e| anyhow!("{e}"))?;
    let hyper = config.hyperparams(&features)?;
    ensure_out_dir(out)?;
    let started = std::time::Instant::now();
    let (trace, model_name) = match config.model {
        Model::Ofm => {
            let run_cfg = RunOfmConfig {
                kstar: config.kstar,
                hyper,
                ladder: TemperingLadder::new(config.ladder.clone(), config.swap_interval).map_err(|e| anyhow!("{e}"))?,
                iterations: config.iterations,
                burn_in: config.burn_in,
                thin: config.thin,
                seed: config.seed,
                exec: ExecMode::default(),
            };
            (run_ofm(&features, &run_cfg).map_err(|e| anyhow!("{e}"))?, "ofm")
        }
        Model::Dpm => {
            let run_cfg = RunDpmConfig {
                k_init: config.kstar,
                hyper,
                iterations: config.iterations,
                burn_in: config.burn_in,
                thin: config.thin,
                seed: config.seed,
                moves_per_sweep: config.moves_per_sweep,
                exec: ExecMode::default(),
                check_invariants: true,
            };
            (run_dpm(&features, &run_cfg).map_err(|e| anyhow!("{e}"))?, "dpm")
        }
    };
    let elapsed = started.elapsed().as_secs_f64();

    let mut trace_buf = Vec::new();
    trace.write_csv(&mut trace_buf)?;
    write_atomic(&out.join(format!("{model_name}_trace.csv")), &trace_buf)?;

    let dist = occupied_distribution(&trace).map_err(|e| anyhow!("{e}"))?;
    let summary = report::RunSummary {
        schema: 1,
        model: model_name.to_string(),
        n: features.n(),
        r: features.r(),
        kept_iterations: report::trace_kept(&trace),
        burn_in: trace.burn_in,
        occupied_distribution: report::occupied_rows(&dist),
        swap_acceptance_rates: trace.swap_acceptance.clone(),
        represented_components: trace.represented_counts.clone(),
        concentration: trace.concentrations.clone(),
        config: config.clone(),
    };
    let json = serde_json::to_string_pretty(&summary)?;
    write_atomic(&out.join(format!("{model_name}_summary.json")), json.as_bytes())?;
    eprintln!("run: {model_name} finished in {elapsed:.1}s wall time; occupied mode {}", dist.modal_count());
    Ok(())
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionRule {
    /// PEAR over trace partitions plus hierarchical cuts.
    Pear,
    /// PEAR restricted to iterations at the modal occupied count.
    Modal,
}

impl std::str::FromStr for PartitionRule {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "pear" => Ok(PartitionRule::Pear),
            "modal" => Ok(PartitionRule::Modal),
            other => bail!("unknown partition rule {other:?} (expected `pear` or `modal`)"),
        }
    }
}

fn optimal_partition(trace: &AllocationTrace, p: &SimilarityMatrix, rule: PartitionRule) -> Result<Partition> {
    match rule {
        PartitionRule::Pear => {
            let candidates = candidate_partitions(trace, p).map_err(|e| anyhow!("{e}"))?;
            pear_optimal(p, &candidates).map_err(|e| anyhow!("{e}"))
        }
        PartitionRule::Modal => ofm_modal_partition(trace).map_err(|e| anyhow!("{e}")),
    }
}

pub fn cmd_analyze(
    trace_path: &Path,
    features_path: &Path,
    rule: PartitionRule,
    waveforms_path: Option<&Path>,
    color_labels_path: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let trace = AllocationTrace::read_csv(trace_path).map_err(|e| anyhow!("{e}"))?;
    let features = load_features(features_path, true).map_err(|e| anyhow!("{e}"))?;
    if trace.n() != features.n() {
        bail!(
            "trace covers {} observations but features have {} rows",
            trace.n(),
            features.n()
        );
    }
    let p = pairwise_similarity(&trace).map_err(|e| anyhow!("{e}"))?;
    let partition = optimal_partition(&trace, &p, rule)?;

    let curves: Mat = match waveforms_path {
        Some(path) => {
            let w = load_waveforms(path, false).map_err(|e| anyhow!("{e}"))?;
            if w.n() != features.n() {
                bail!("waveforms have {} rows but features have {}", w.n(), features.n());
            }
            w.values().clone()
        }
        None => features.values().clone(),
    };
    let color_by = match color_labels_path {
        Some(path) => Some(Partition::new(&load_label_column(path)?)),
        None => None,
    };
    if let Some(ref c) = color_by {
        if c.n() != features.n() {
            bail!("coloring labels cover {} observations but features have {}", c.n(), features.n());
        }
    }

    ensure_out_dir(out)?;
    write_atomic(&out.join("similarity.csv"), similarity_csv(&p).as_bytes())?;
    let display = partition.by_descending_size();
    let labels_1based: Vec<usize> = display.labels().iter().map(|&l| l + 1).collect();
    write_atomic(&out.join("partition.csv"), labels_csv(&labels_1based).as_bytes())?;
    let order = pc1_order(&features);
    write_atomic(&out.join("heatmap.svg"), svg::heatmap_svg(&p, &order, "posterior pairwise similarity").as_bytes())?;
    write_atomic(
        &out.join("clusters.svg"),
        svg::cluster_frames_svg(&curves, &partition, color_by.as_ref()).as_bytes(),
    )?;
    eprintln!("analyze: optimal partition has {} clusters", partition.num_clusters());
    Ok(())
}

// ---------------------------------------------------------------- compare

pub fn cmd_compare(trace_ofm_path: &Path, trace_dpm_path: &Path, features_path: &Path, out: &Path) -> Result<()> {
    let trace_ofm = AllocationTrace::read_csv(trace_ofm_path).map_err(|e| anyhow!("{e}"))?;
    let trace_dpm = AllocationTrace::read_csv(trace_dpm_path).map_err(|e| anyhow!("{e}"))?;
    let features = load_features(features_path, true).map_err(|e| anyhow!("{e}"))?;
    if trace_ofm.n() != trace_dpm.n() {
        bail!("traces cover different observation counts: {} vs {}", trace_ofm.n(), trace_dpm.n());
    }
    if trace_ofm.n() != features.n() {
        bail!("traces cover {} observations but features have {} rows", trace_ofm.n(), features.n());
    }
    let p_ofm = pairwise_similarity(&trace_ofm).map_err(|e| anyhow!("{e}"))?;
    let p_dpm = pairwise_similarity(&trace_dpm).map_err(|e| anyhow!("{e}"))?;
    let (comparison, mean_abs_diff) = compare_similarity(&p_ofm, &p_dpm).map_err(|e| anyhow!("{e}"))?;

    let dist_ofm = occupied_distribution(&trace_ofm).map_err(|e| anyhow!("{e}"))?;
    let dist_dpm = occupied_distribution(&trace_dpm).map_err(|e| anyhow!("{e}"))?;
    let part_ofm = ofm_modal_partition(&trace_ofm).map_err(|e| anyhow!("{e}"))?;
    let cands = candidate_partitions(&trace_dpm, &p_dpm).map_err(|e| anyhow!("{e}"))?;
    let part_dpm = pear_optimal(&p_dpm, &cands).map_err(|e| anyhow!("{e}"))?;

    ensure_out_dir(out)?;
    let order = pc1_order(&features);
    write_atomic(&out.join("comparison.svg"), svg::triptych_svg(&p_ofm, &p_dpm, &comparison, &order).as_bytes())?;
    let metrics = serde_json::json!({
        "schema": 1,
        "n": features.n(),
        "mean_abs_diff": mean_abs_diff,
        "occupied_distribution": report::occupied_side_by_side(&dist_ofm, &dist_dpm),
        "ofm_partition": {
            "clusters": part_ofm.num_clusters(),
            "sizes": report::partition_table(&part_ofm),
        },
        "dpm_partition": {
            "clusters": part_dpm.num_clusters(),
            "sizes": report::partition_table(&part_dpm),
        },
    });
    write_atomic(&out.join("metrics.json"), serde_json::to_string_pretty(&metrics)?.as_bytes())?;
    eprintln!("compare: mean |P_ofm - P_dpm| = {mean_abs_diff:.4}");
    Ok(())
}

/// Resolve the output directory: flag, then environment, then default.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SPIKEMIX_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("spikemix-out"))
}
