//! Principal component feature reduction for waveform matrices.

use crate::data::{FeatureMatrix, WaveformMatrix};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};

/// Fitted rotation: enough to project new rows or reconstruct.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Per-column centering offsets (means, or medians under robust scaling).
    pub offsets: Vec<f64>,
    /// Per-column divisors (ones, or MADs under robust scaling).
    pub scales: Vec<f64>,
    /// s × r matrix whose columns are the retained eigenvectors.
    pub rotation: Mat,
    /// Eigenvalues of the full covariance, descending.
    pub eigenvalues: Vec<f64>,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Project waveforms onto their top-r principal components.
///
/// Columns are centered by their mean (or by median and divided by MAD
/// when `robust_scale`); eigenvalues are sorted descending and each
/// eigenvector's sign is fixed so its largest-magnitude loading is
/// positive. Explained variance is the retained eigenvalues over the
/// covariance trace.
pub fn pca_reduce(w: &WaveformMatrix, r: usize, center: bool, robust_scale: bool) -> Result<FeatureMatrix> {
    let (model, features) = pca_fit(w, r, center, robust_scale)?;
    let _ = model;
    Ok(features)
}

/// As [`pca_reduce`], also returning the fitted model.
pub fn pca_fit(w: &WaveformMatrix, r: usize, center: bool, robust_scale: bool) -> Result<(PcaModel, FeatureMatrix)> {
    let n = w.n();
    let s = w.s();
    if r == 0 || r > s.min(n) {
        return Err(Error::InvalidParameter(format!(
            "requested {r} components but r must satisfy 1 <= r <= min(n, s) = {}",
            s.min(n)
        )));
    }

    let mut offsets = vec![0.0; s];
    let mut scales = vec![1.0; s];
    if robust_scale {
        for j in 0..s {
            let mut col: Vec<f64> = (0..n).map(|i| w.row(i)[j]).collect();
            let med = median(&mut col);
            let mut dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
            let mad = median(&mut dev);
            if mad == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "robust scaling impossible: column {} has zero median absolute deviation",
                    j + 1
                )));
            }
            offsets[j] = med;
            scales[j] = mad;
        }
    } else if center {
        for j in 0..s {
            offsets[j] = (0..n).map(|i| w.row(i)[j]).sum::<f64>() / n as f64;
        }
    }

    let mut x = Mat::zeros(n, s);
    for i in 0..n {
        for j in 0..s {
            x[(i, j)] = (w.row(i)[j] - offsets[j]) / scales[j];
        }
    }

    let denom = (n as f64 - 1.0).max(1.0);
    let mut cov = Mat::zeros(s, s);
    for i in 0..n {
        let row = x.row(i);
        for a in 0..s {
            for b in a..s {
                cov[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..s {
        for b in a..s {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let (eigenvalues, mut vectors) = symmetric_eigen(&cov)?;
    // sign convention: largest-magnitude loading positive
    for k in 0..s {
        let mut best = 0;
        for i in 1..s {
            if vectors[(i, k)].abs() > vectors[(best, k)].abs() {
                best = i;
            }
        }
        if vectors[(best, k)] < 0.0 {
            for i in 0..s {
                vectors[(i, k)] = -vectors[(i, k)];
            }
        }
    }

    let trace: f64 = eigenvalues.iter().sum();
    let explained: Vec<f64> = eigenvalues
        .iter()
        .take(r)
        .map(|&l| if trace > 0.0 { (l / trace).clamp(0.0, 1.0) } else { 0.0 })
        .collect();

    let mut rotation = Mat::zeros(s, r);
    for j in 0..s {
        for k in 0..r {
            rotation[(j, k)] = vectors[(j, k)];
        }
    }

    let mut scores = Mat::zeros(n, r);
    for i in 0..n {
        for k in 0..r {
            let mut acc = 0.0;
            for j in 0..s {
                acc += x[(i, j)] * rotation[(j, k)];
            }
            scores[(i, k)] = acc;
        }
    }

    let features = FeatureMatrix::from_mat(scores)?.with_explained_variance(explained)?;
    let model = PcaModel { offsets, scales, rotation, eigenvalues };
    Ok((model, features))
}
