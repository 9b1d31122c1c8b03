//! Post-burn-in allocation traces and their CSV form.
//!
//! The CSV layout is one row per kept iteration with n integer columns;
//! labels are written 1-based and mapped back to 0-based on read.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Kept draws of a sampler run plus per-iteration summaries.
#[derive(Debug, Clone)]
pub struct AllocationTrace {
    /// 0-based allocation vector per kept iteration.
    pub draws: Vec<Vec<usize>>,
    /// Number of components with at least one member, per kept iteration.
    pub occupied_counts: Vec<usize>,
    /// Σ_k log π_k per kept iteration.
    pub weight_sums: Vec<f64>,
    /// Iterations discarded before the first kept draw.
    pub burn_in: usize,
    /// Acceptance rate per adjacent tempering rung pair (empty for
    /// single-chain runs).
    pub swap_acceptance: Vec<f64>,
    /// Represented stick count per kept iteration (slice-sampler runs).
    pub represented_counts: Vec<usize>,
    /// Concentration parameter per kept iteration (slice-sampler runs).
    pub concentrations: Vec<f64>,
}

impl AllocationTrace {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n(&self) -> usize {
        self.draws.first().map_or(0, |d| d.len())
    }

    /// Occupied components of one allocation vector.
    pub fn occupied_of(draw: &[usize]) -> usize {
        let mut labels: Vec<usize> = draw.to_vec();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        for draw in &self.draws {
            let row: Vec<String> = draw.iter().map(|&z| (z + 1).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Read a trace back from its CSV form. Summaries that are not part
    /// of the file (weight sums, swap rates, stick counts) come back
    /// empty; occupied counts are recomputed from the draws.
    pub fn read_csv(path: &Path) -> Result<AllocationTrace> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: display.clone(), kind: e.to_string() })?;
        let mut draws: Vec<Vec<usize>> = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if let Some(w) = width {
                if fields.len() != w {
                    return Err(Error::RaggedRow { path: display, row: idx + 1, expected: w, found: fields.len() });
                }
            } else {
                width = Some(fields.len());
            }
            let mut row = Vec::with_capacity(fields.len());
            for (col, field) in fields.iter().enumerate() {
                let v: usize = field.trim().parse().map_err(|_| Error::BadNumber {
                    path: display.clone(),
                    row: idx + 1,
                    col: col + 1,
                    value: field.trim().to_string(),
                })?;
                if v == 0 {
                    return Err(Error::BadNumber {
                        path: display.clone(),
                        row: idx + 1,
                        col: col + 1,
                        value: field.trim().to_string(),
                    });
                }
                row.push(v - 1);
            }
            draws.push(row);
        }
        if draws.is_empty() {
            return Err(Error::EmptyFile { path: display });
        }
        let occupied_counts = draws.iter().map(|d| Self::occupied_of(d)).collect();
        Ok(AllocationTrace {
            draws,
            occupied_counts,
            weight_sums: Vec::new(),
            burn_in: 0,
            swap_acceptance: Vec::new(),
            represented_counts: Vec::new(),
            concentrations: Vec::new(),
        })
    }
}
