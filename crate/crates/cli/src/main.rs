//! spikemix: fit and compare Bayesian mixture models on spike features.
//!
//! Pipeline: `simulate` (synthetic data) → `pca` (feature reduction) →
//! `run` (OFM or DPM sampler) → `analyze` (similarity + partition) →
//! `compare` (side-by-side posteriors).

mod commands;
mod config;
mod kv;
mod presets;
mod report;
mod svg;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use commands::PartitionRule;
use config::{MeanMode, Model, RunConfig, ScaleMode};
use kv::KvMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "spikemix", version, about = "Bayesian mixture-model spike sorting toolkit")]
struct Cli {
    /// Output directory (default: $SPIKEMIX_OUT_DIR, then ./spikemix-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic features or waveforms with ground-truth labels
    Simulate {
        /// Bundled preset name (`paperlike` or `waveforms`)
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// Simulation spec file (flat key-value or JSON)
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Reduce waveforms to principal-component scores
    Pca {
        /// Waveform CSV, one spike per row
        #[arg(long)]
        input: PathBuf,
        /// Treat the first row as a header
        #[arg(long, default_value_t = false)]
        header: bool,
        /// Number of components to keep
        #[arg(short, default_value_t = 4)]
        r: usize,
        /// Skip column centering
        #[arg(long, default_value_t = false)]
        no_center: bool,
        /// Median-center and MAD-scale columns before the rotation
        #[arg(long, default_value_t = false)]
        robust_scale: bool,
        /// Rescale the scores to unit variance
        #[arg(long, default_value_t = false)]
        standardize: bool,
    },
    /// Run a sampler over a features CSV and record its trace
    Run {
        /// Run configuration file (flat key-value or JSON)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Features CSV (overrides the config `input`)
        #[arg(long)]
        features: Option<PathBuf>,
        /// `ofm` or `dpm` (overrides the config `model`)
        #[arg(long, value_parser = parse_model)]
        model: Option<Model>,
        #[arg(long)]
        kstar: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated tempering ladder (OFM)
        #[arg(long)]
        ladder: Option<String>,
        #[arg(long)]
        swap_interval: Option<usize>,
        /// Label-switch attempts per sweep (DPM)
        #[arg(long)]
        moves_per_sweep: Option<usize>,
        #[arg(long)]
        n0: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
        /// `scaled-data-cov` or `explicit`
        #[arg(long)]
        c0_mode: Option<String>,
        #[arg(long)]
        c0_factor: Option<f64>,
        /// `data-mean` or `explicit`
        #[arg(long)]
        b0_mode: Option<String>,
        /// Comma-separated prior mean (with --b0-mode explicit)
        #[arg(long)]
        b0: Option<String>,
    },
    /// Summarize one trace: similarity matrix, optimal partition, figures
    Analyze {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// `pear` (DPM convention) or `modal` (OFM convention)
        #[arg(long, default_value = "pear", value_parser = parse_rule)]
        rule: PartitionRule,
        /// Waveform CSV to draw in the cluster frames (defaults to features)
        #[arg(long)]
        waveforms: Option<PathBuf>,
        /// Partition/label CSV used to cross-color the cluster frames
        #[arg(long)]
        color_labels: Option<PathBuf>,
    },
    /// Compare OFM and DPM traces over the same observations
    Compare {
        #[arg(long)]
        trace_ofm: PathBuf,
        #[arg(long)]
        trace_dpm: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
}

fn parse_model(raw: &str) -> Result<Model> {
    raw.parse()
}

fn parse_rule(raw: &str) -> Result<PartitionRule> {
    raw.parse()
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let out = commands::resolve_out_dir(cli.out.clone());
    match cli.command {
        Command::Simulate { preset, spec, seed } => {
            let (text, origin) = match (preset, spec) {
                (Some(name), None) => match presets::lookup(&name) {
                    Some(text) => (text.to_string(), format!("preset `{name}`")),
                    None => bail!("unknown preset {name:?}; available: {}", presets::NAMES.join(", ")),
                },
                (None, Some(path)) => (
                    std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
                    path.display().to_string(),
                ),
                (None, None) => bail!("simulate needs --preset or --spec"),
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            commands::cmd_simulate(&text, &origin, seed, &out)
        }
        Command::Pca { input, header, r, no_center, robust_scale, standardize } => {
            commands::cmd_pca(&input, header, r, !no_center, robust_scale, standardize, &out)
        }
        Command::Run {
            config,
            features,
            model,
            kstar,
            iterations,
            burn_in,
            thin,
            seed,
            ladder,
            swap_interval,
            moves_per_sweep,
            n0,
            c0,
            c0_mode,
            c0_factor,
            b0_mode,
            b0,
        } => {
            let mut cfg = RunConfig::default();
            if let Some(path) = config {
                let kv = KvMap::parse_file(&path)?;
                cfg.apply_kv(&kv)?;
            }
            if let Some(f) = features {
                cfg.input = f.display().to_string();
            }
            if let Some(m) = model {
                cfg.model = m;
            }
            if let Some(v) = kstar {
                cfg.kstar = v;
            }
            if let Some(v) = iterations {
                cfg.iterations = v;
            }
            if let Some(v) = burn_in {
                cfg.burn_in = v;
            }
            if let Some(v) = thin {
                cfg.thin = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(raw) = ladder {
                cfg.ladder = parse_f64_list(&raw)?;
            }
            if let Some(v) = swap_interval {
                cfg.swap_interval = v;
            }
            if let Some(v) = moves_per_sweep {
                cfg.moves_per_sweep = v;
            }
            if let Some(v) = n0 {
                cfg.n0 = v;
            }
            if let Some(v) = c0 {
                cfg.c0 = v;
            }
            if let Some(raw) = c0_mode {
                cfg.c0_mode = match raw.as_str() {
                    "scaled-data-cov" => ScaleMode::ScaledDataCov,
                    "explicit" => ScaleMode::Explicit,
                    other => bail!("c0-mode must be `scaled-data-cov` or `explicit`, got {other:?}"),
                };
            }
            if let Some(v) = c0_factor {
                cfg.c0_factor = v;
            }
            if let Some(raw) = b0_mode {
                cfg.b0_mode = match raw.as_str() {
                    "data-mean" => MeanMode::DataMean,
                    "explicit" => MeanMode::Explicit,
                    other => bail!("b0-mode must be `data-mean` or `explicit`, got {other:?}"),
                };
            }
            if let Some(raw) = b0 {
                cfg.b0 = Some(parse_f64_list(&raw)?);
            }
            commands::cmd_run(&cfg, &out)
        }
        Command::Analyze { trace, features, rule, waveforms, color_labels } => commands::cmd_analyze(
            &trace,
            &features,
            rule,
            waveforms.as_deref(),
            color_labels.as_deref(),
            &out,
        ),
        Command::Compare { trace_ofm, trace_dpm, features } => {
            commands::cmd_compare(&trace_ofm, &trace_dpm, &features, &out)
        }
    }
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("cannot parse {s:?} as a number"))
        })
        .collect()
}
