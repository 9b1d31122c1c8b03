//! Synthetic ground-truth generators for desk-scale validation runs.
//!
//! Truth labels use 0 for redrawn noise points and 1..=K for mixture
//! components.

use crate::data::{FeatureMatrix, WaveformMatrix};
use crate::dist::{sample_categorical_log, SimplexVector};
use crate::error::{Error, Result};
use crate::linalg::{sample_mvn, Mat, SpdMatrix};
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::{Open01, StandardNormal};

/// Ground-truth mixture used to generate validation data.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub weights: SimplexVector,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<SpdMatrix>,
    pub n: usize,
    pub outlier_fraction: f64,
    pub outlier_scale: f64,
}

impl SyntheticSpec {
    pub fn new(
        weights: SimplexVector,
        means: Vec<Vec<f64>>,
        covariances: Vec<SpdMatrix>,
        n: usize,
        outlier_fraction: f64,
        outlier_scale: f64,
    ) -> Result<Self> {
        let k = weights.len();
        if means.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: means.len() });
        }
        if covariances.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: covariances.len() });
        }
        let r = means.first().map_or(0, |m| m.len());
        if r == 0 {
            return Err(Error::InvalidParameter("component means must be non-empty".into()));
        }
        for m in &means {
            if m.len() != r {
                return Err(Error::DimensionMismatch { expected: r, got: m.len() });
            }
        }
        for c in &covariances {
            if c.dim() != r {
                return Err(Error::DimensionMismatch { expected: r, got: c.dim() });
            }
        }
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        if !(0.0..1.0).contains(&outlier_fraction) {
            return Err(Error::InvalidParameter(format!("outlier fraction {outlier_fraction} must lie in [0, 1)")));
        }
        if outlier_fraction > 0.0 && outlier_scale <= 1.0 {
            return Err(Error::InvalidParameter(format!("outlier scale {outlier_scale} must exceed 1")));
        }
        Ok(Self { weights, means, covariances, n, outlier_fraction, outlier_scale })
    }

    pub fn k_true(&self) -> usize {
        self.weights.len()
    }

    pub fn r(&self) -> usize {
        self.means[0].len()
    }

    /// Four well-separated r=4 Gaussians with unequal weights and no
    /// noise; the bundled dataset behind the recovery test suites.
    pub fn well_separated_demo(n: usize) -> Self {
        let weights = SimplexVector::new(vec![0.35, 0.30, 0.20, 0.15]).unwrap();
        let means = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![8.0, 0.0, 4.0, -3.0],
            vec![-6.0, 7.0, -2.0, 2.0],
            vec![3.0, -8.0, 6.0, 5.0],
        ];
        let covariances = vec![
            SpdMatrix::identity(4),
            SpdMatrix::new(Mat::from_rows(&[
                vec![1.2, 0.3, 0.0, 0.0],
                vec![0.3, 0.8, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.2],
                vec![0.0, 0.0, 0.2, 0.9],
            ]))
            .unwrap(),
            SpdMatrix::identity(4).scaled(0.7).unwrap(),
            SpdMatrix::new(Mat::from_rows(&[
                vec![1.0, -0.2, 0.0, 0.0],
                vec![-0.2, 1.1, 0.0, 0.0],
                vec![0.0, 0.0, 0.6, 0.0],
                vec![0.0, 0.0, 0.0, 1.3],
            ]))
            .unwrap(),
        ];
        Self::new(weights, means, covariances, n, 0.0, 2.0).unwrap()
    }

    /// The demo mixture plus a small redrawn-noise fraction, mimicking
    /// recordings where scattered spikes fit no template.
    pub fn noisy_demo(n: usize) -> Self {
        let mut spec = Self::well_separated_demo(n);
        spec.outlier_fraction = 0.05;
        spec.outlier_scale = 4.0;
        spec
    }
}

/// Draw the demo mixture with heavy-tailed clusters: a `fraction` of
/// each cluster's members is displaced onto a Mahalanobis shell of
/// radius Uniform(`shell_lo`, `shell_hi`) about its own center, keeping
/// its cluster label. The displaced spikes sit too far out for a
/// Gaussian core but too close to count as separate structure, the
/// regime where the two samplers treat uncertainty differently.
pub fn generate_heavy_tailed_mixture(
    n: usize,
    fraction: f64,
    shell_lo: f64,
    shell_hi: f64,
    rng: &mut RngStream,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    let spec = SyntheticSpec::well_separated_demo(n);
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("fraction {fraction} must lie in [0, 1)")));
    }
    if !(shell_hi >= shell_lo && shell_lo > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid shell [{shell_lo}, {shell_hi}]")));
    }
    let log_w: Vec<f64> = spec.weights.weights().iter().map(|&w| w.ln()).collect();
    let chols: Vec<_> = spec.covariances.iter().map(|c| c.cholesky()).collect();
    let r = spec.r();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = sample_categorical_log(&log_w, rng)?;
        let mut y = sample_mvn(&spec.means[c], &chols[c], rng)?;
        let flip: f64 = rng.sample(Open01);
        if flip < fraction {
            // direction uniform on the unit sphere, radius on the shell
            let mut dir: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            dir.iter_mut().for_each(|v| *v /= norm);
            let radius = shell_lo + (shell_hi - shell_lo) * rng.sample::<f64, _>(Open01);
            let lower = chols[c].lower();
            for i in 0..r {
                let mut disp = 0.0;
                for j in 0..=i {
                    disp += lower[(i, j)] * dir[j];
                }
                y[i] = spec.means[c][i] + radius * disp;
            }
        }
        rows.push(y);
        labels.push(c + 1);
    }
    Ok((FeatureMatrix::from_rows(rows)?, labels))
}

/// The bundled validation dataset: heavy-tailed demo clusters at the
/// shell regime that separates the two samplers' uncertainty handling.
pub fn bundled_demo_dataset(n: usize, data_seed: u64) -> (FeatureMatrix, Vec<usize>) {
    generate_heavy_tailed_mixture(n, 0.05, 3.3, 4.5, &mut RngStream::new(data_seed, 0))
        .expect("fixed parameters are valid")
}

/// Draw features and truth labels from a mixture spec.
///
/// Each observation samples its component, then its value; a point
/// flagged as an outlier is redrawn about the same component mean with
/// the covariance inflated by `outlier_scale` and labeled 0.
pub fn generate_synthetic_mixture(spec: &SyntheticSpec, rng: &mut RngStream) -> Result<(FeatureMatrix, Vec<usize>)> {
    let log_w: Vec<f64> = spec.weights.weights().iter().map(|&w| w.ln()).collect();
    let chols: Vec<_> = spec.covariances.iter().map(|c| c.cholesky()).collect();
    let inflated: Vec<_> = if spec.outlier_fraction > 0.0 {
        spec.covariances
            .iter()
            .map(|c| c.scaled(spec.outlier_scale).map(|s| s.cholesky()))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut rows = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let c = sample_categorical_log(&log_w, rng)?;
        let mut y = sample_mvn(&spec.means[c], &chols[c], rng)?;
        let mut label = c + 1;
        if spec.outlier_fraction > 0.0 {
            let u: f64 = rng.sample(Open01);
            if u < spec.outlier_fraction {
                y = sample_mvn(&spec.means[c], &inflated[c], rng)?;
                label = 0;
            }
        }
        rows.push(y);
        labels.push(label);
    }
    Ok((FeatureMatrix::from_rows(rows)?, labels))
}

/// Build waveforms as template plus i.i.d. Gaussian noise per sample.
///
/// Rows are grouped by template in order; labels are 1-based template
/// indices.
pub fn generate_synthetic_waveforms(
    templates: &Mat,
    counts: &[usize],
    noise_sd: f64,
    rng: &mut RngStream,
) -> Result<(WaveformMatrix, Vec<usize>)> {
    if counts.len() != templates.rows() {
        return Err(Error::DimensionMismatch { expected: templates.rows(), got: counts.len() });
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise sd {noise_sd} must be non-negative")));
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidParameter("at least one waveform must be requested".into()));
    }
    let s = templates.cols();
    let mut rows = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (t, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            let mut row = templates.row(t).to_vec();
            if noise_sd > 0.0 {
                for v in row.iter_mut().take(s) {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += noise_sd * z;
                }
            }
            rows.push(row);
            labels.push(t + 1);
        }
    }
    Ok((WaveformMatrix::new(Mat::from_rows(&rows))?, labels))
}
