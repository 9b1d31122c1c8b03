//! Waveform and feature containers plus CSV ingestion.
//!
//! Input files are rectangular UTF-8 comma-separated numeric tables
//! with an optional header row. Parse errors carry 1-based row/column
//! positions counted over the whole file, header included.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use std::io::Write;
use std::path::Path;

/// One detected spike per row, one sample per column.
#[derive(Debug, Clone)]
pub struct WaveformMatrix {
    values: Mat,
    pub sample_interval_ms: Option<f64>,
}

impl WaveformMatrix {
    pub fn new(values: Mat) -> Result<Self> {
        if values.data().iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter("waveform matrix contains NaN".into()));
        }
        Ok(Self { values, sample_interval_ms: None })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    /// Samples per waveform.
    pub fn s(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

/// n × r matrix of observations: PCA scores or raw features.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    values: Mat,
    explained_variance: Option<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidParameter("feature matrix must be non-empty".into()));
        }
        let r = rows[0].len();
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidParameter("feature matrix rows have unequal lengths".into()));
        }
        Ok(Self { values: Mat::from_rows(&rows), explained_variance: None })
    }

    pub fn from_mat(values: Mat) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::InvalidParameter("feature matrix must be non-empty".into()));
        }
        Ok(Self { values, explained_variance: None })
    }

    /// Zero-observation matrix of dimension r, for prior-only runs.
    pub fn empty(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("feature dimension must be at least 1".into()));
        }
        Ok(Self { values: Mat::zeros(0, r), explained_variance: None })
    }

    pub fn with_explained_variance(mut self, ev: Vec<f64>) -> Result<Self> {
        if ev.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter("explained-variance proportions must lie in [0,1]".into()));
        }
        if ev.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(Error::InvalidParameter("explained-variance proportions must be non-increasing".into()));
        }
        let total: f64 = ev.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!("cumulative explained variance {total} exceeds 1")));
        }
        self.explained_variance = Some(ev);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    /// Feature dimension.
    pub fn r(&self) -> usize {
        self.values.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn explained_variance(&self) -> Option<&[f64]> {
        self.explained_variance.as_deref()
    }

    /// Column means, ȳ.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        let mut m = vec![0.0; self.r()];
        for i in 0..self.n() {
            for (j, v) in self.row(i).iter().enumerate() {
                m[j] += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Sample covariance about the column means (divisor n − 1).
    pub fn covariance(&self) -> Mat {
        let n = self.n();
        let r = self.r();
        let means = self.column_means();
        let mut cov = Mat::zeros(r, r);
        for i in 0..n {
            let row = self.row(i);
            for a in 0..r {
                let da = row[a] - means[a];
                for b in a..r {
                    cov[(a, b)] += da * (row[b] - means[b]);
                }
            }
        }
        let denom = (n as f64 - 1.0).max(1.0);
        for a in 0..r {
            for b in a..r {
                let v = cov[(a, b)] / denom;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        cov
    }
}

fn read_numeric_csv(path: &Path, has_header: bool) -> Result<Mat> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: display.clone(), kind: e.to_string() })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let row_no = idx + 1;
        if idx == 0 && has_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if let Some(w) = width {
            if fields.len() != w {
                return Err(Error::RaggedRow { path: display, row: row_no, expected: w, found: fields.len() });
            }
        } else {
            width = Some(fields.len());
        }
        let mut row = Vec::with_capacity(fields.len());
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::BadNumber {
                path: display.clone(),
                row: row_no,
                col: col + 1,
                value: field.trim().to_string(),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile { path: display });
    }
    Ok(Mat::from_rows(&rows))
}

/// Load a waveform matrix from a rectangular numeric CSV.
pub fn load_waveforms(path: &Path, has_header: bool) -> Result<WaveformMatrix> {
    WaveformMatrix::new(read_numeric_csv(path, has_header)?)
}

/// Load a feature matrix from a rectangular numeric CSV.
pub fn load_features(path: &Path, has_header: bool) -> Result<FeatureMatrix> {
    FeatureMatrix::from_mat(read_numeric_csv(path, has_header)?)
}

/// Write a feature matrix with the `pc1..pcr` header convention.
pub fn write_features_csv(x: &FeatureMatrix, out: &mut impl Write) -> std::io::Result<()> {
    let header: Vec<String> = (1..=x.r()).map(|j| format!("pc{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..x.n() {
        let row: Vec<String> = x.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Write the explained-variance table: `component,proportion`.
pub fn write_explained_variance_csv(ev: &[f64], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "component,proportion")?;
    for (i, p) in ev.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, p)?;
    }
    Ok(())
}
