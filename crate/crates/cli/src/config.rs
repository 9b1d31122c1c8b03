//! Run configuration: defaults mirroring the reference protocol, a
//! config-file layer, and command-line overrides on top.

use crate::kv::KvMap;
use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use spikemix_core::data::FeatureMatrix;
use spikemix_core::linalg::{Mat, SpdMatrix};
use spikemix_core::niw::NiwHyperparams;
use spikemix_core::ofm::TemperingLadder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ofm,
    Dpm,
}

impl std::str::FromStr for Model {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "ofm" => Ok(Model::Ofm),
            "dpm" => Ok(Model::Dpm),
            other => bail!("unknown model {other:?} (expected `ofm` or `dpm`)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanMode {
    DataMean,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    ScaledDataCov,
    Explicit,
}

/// Everything `run` needs, before the data-dependent pieces (b0 = ȳ,
/// C0 = factor·cov) are resolved against the features.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: Model,
    pub input: String,
    pub has_header: bool,
    pub kstar: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub ladder: Vec<f64>,
    pub swap_interval: usize,
    pub moves_per_sweep: usize,
    pub b0_mode: MeanMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0: Option<Vec<f64>>,
    pub n0: f64,
    pub c0: f64,
    pub c0_mode: ScaleMode,
    pub c0_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0_matrix: Option<Vec<Vec<f64>>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Ofm,
            input: String::new(),
            has_header: true,
            kstar: 10,
            iterations: 50_000,
            burn_in: 25_000,
            thin: 1,
            seed: 1,
            ladder: TemperingLadder::default_ladder().alphas,
            swap_interval: 5,
            moves_per_sweep: 2,
            b0_mode: MeanMode::DataMean,
            b0: None,
            n0: 0.01,
            c0: 5.0,
            c0_mode: ScaleMode::ScaledDataCov,
            c0_factor: 0.75,
            c0_matrix: None,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "schema",
    "model",
    "input",
    "has_header",
    "kstar",
    "iterations",
    "burn_in",
    "thin",
    "seed",
    "ladder",
    "swap_interval",
    "moves_per_sweep",
    "b0_mode",
    "b0",
    "n0",
    "c0",
    "c0_mode",
    "c0_factor",
    "c0_matrix",
];

impl RunConfig {
    /// Overlay config-file entries onto the defaults.
    pub fn apply_kv(&mut self, kv: &KvMap) -> Result<()> {
        for key in kv.keys() {
            if !KNOWN_KEYS.contains(&key) {
                bail!("unknown configuration key {key:?}");
            }
        }
        if let Some(model) = kv.get("model") {
            self.model = model.parse()?;
        }
        if let Some(input) = kv.get("input") {
            self.input = input.to_string();
        }
        if let Some(v) = kv.parse_scalar::<bool>("has_header")? {
            self.has_header = v;
        }
        if let Some(v) = kv.parse_scalar::<usize>("kstar")? {
            self.kstar = v;
        }
        if let Some(v) = kv.parse_scalar::<usize>("iterations")? {
            self.iterations = v;
        }
        if let Some(v) = kv.parse_scalar::<usize>("burn_in")? {
            self.burn_in = v;
        }
        if let Some(v) = kv.parse_scalar::<usize>("thin")? {
            self.thin = v;
        }
        if let Some(v) = kv.parse_scalar::<u64>("seed")? {
            self.seed = v;
        }
        if let Some(v) = kv.parse_vec_f64("ladder")? {
            self.ladder = v;
        }
        if let Some(v) = kv.parse_scalar::<usize>("swap_interval")? {
            self.swap_interval = v;
        }
        if let Some(v) = kv.parse_scalar::<usize>("moves_per_sweep")? {
            self.moves_per_sweep = v;
        }
        if let Some(mode) = kv.get("b0_mode") {
            self.b0_mode = match mode {
                "data-mean" => MeanMode::DataMean,
                "explicit" => MeanMode::Explicit,
                other => bail!("b0_mode must be `data-mean` or `explicit`, got {other:?}"),
            };
        }
        if let Some(v) = kv.parse_vec_f64("b0")? {
            self.b0 = Some(v);
        }
        if let Some(v) = kv.parse_scalar::<f64>("n0")? {
            self.n0 = v;
        }
        if let Some(v) = kv.parse_scalar::<f64>("c0")? {
            self.c0 = v;
        }
        if let Some(mode) = kv.get("c0_mode") {
            self.c0_mode = match mode {
                "scaled-data-cov" => ScaleMode::ScaledDataCov,
                "explicit" => ScaleMode::Explicit,
                other => bail!("c0_mode must be `scaled-data-cov` or `explicit`, got {other:?}"),
            };
        }
        if let Some(v) = kv.parse_matrix("c0_matrix")? {
            self.c0_matrix = Some(v);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_empty() {
            bail!("no input features file given (flag --features or config key `input`)");
        }
        if self.iterations <= self.burn_in {
            bail!("iterations ({}) must exceed burn-in ({})", self.iterations, self.burn_in);
        }
        if self.thin == 0 {
            bail!("thin must be at least 1");
        }
        if self.kstar < 1 || (self.model == Model::Ofm && self.kstar < 2) {
            bail!("K* = {} is too small for the chosen model", self.kstar);
        }
        if self.b0_mode == MeanMode::Explicit && self.b0.is_none() {
            bail!("b0_mode = explicit requires a `b0` vector");
        }
        if self.c0_mode == ScaleMode::Explicit && self.c0_matrix.is_none() {
            bail!("c0_mode = explicit requires a `c0_matrix`");
        }
        if !(self.n0 > 0.0) {
            bail!("N0 must be positive, got {}", self.n0);
        }
        if !(self.c0_factor > 0.0) {
            bail!("c0_factor must be positive, got {}", self.c0_factor);
        }
        TemperingLadder::new(self.ladder.clone(), self.swap_interval).map_err(|e| anyhow!("{e}"))?;
        Ok(())
    }

    /// Resolve the data-dependent hyperparameters against the features.
    pub fn hyperparams(&self, x: &FeatureMatrix) -> Result<NiwHyperparams> {
        let b0 = match self.b0_mode {
            MeanMode::DataMean => x.column_means(),
            MeanMode::Explicit => {
                let b0 = self.b0.clone().expect("validated");
                if b0.len() != x.r() {
                    bail!("explicit b0 has length {}, features have dimension {}", b0.len(), x.r());
                }
                b0
            }
        };
        let scale = match self.c0_mode {
            ScaleMode::ScaledDataCov => SpdMatrix::new(x.covariance())
                .and_then(|s| s.scaled(self.c0_factor))
                .map_err(|e| anyhow!("data covariance is not positive definite: {e}"))?,
            ScaleMode::Explicit => {
                let rows = self.c0_matrix.clone().expect("validated");
                let r = rows.len();
                if r != x.r() || rows.iter().any(|row| row.len() != r) {
                    bail!("explicit c0_matrix must be {r0}x{r0}", r0 = x.r());
                }
                let flat: Vec<f64> = rows.into_iter().flatten().collect();
                SpdMatrix::new(Mat::from_vec(r, r, flat)).map_err(|e| anyhow!("c0_matrix: {e}"))?
            }
        };
        NiwHyperparams::new(b0, self.n0, self.c0, scale).map_err(|e| anyhow!("{e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_protocol() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.kstar, 10);
        assert_eq!(cfg.iterations, 50_000);
        assert_eq!(cfg.burn_in, 25_000);
        assert_eq!(cfg.n0, 0.01);
        assert_eq!(cfg.c0, 5.0);
        assert_eq!(cfg.c0_factor, 0.75);
        assert_eq!(cfg.b0_mode, MeanMode::DataMean);
    }

    #[test]
    fn kv_overlay_and_validation() {
        let mut cfg = RunConfig::default();
        let kv = KvMap::parse_flat("schema = 1\nmodel = dpm\ninput = f.csv\niterations = 100\nburn_in = 50\nseed = 9\n").unwrap();
        cfg.apply_kv(&kv).unwrap();
        assert_eq!(cfg.model, Model::Dpm);
        assert_eq!(cfg.iterations, 100);
        cfg.validate().unwrap();

        cfg.burn_in = 100;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = RunConfig::default();
        let kv = KvMap::parse_flat("schema = 1\nmodle = ofm\n").unwrap();
        assert!(cfg.apply_kv(&kv).is_err());
    }
}
