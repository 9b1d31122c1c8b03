//! Dependency-free SVG emission for the three figure families:
//! per-component score histograms, similarity heatmaps (linear
//! grayscale, white = probability one), and per-cluster waveform
//! frames with optional cross-coloring by a second partition.
//!
//! All coordinates are written with fixed precision so identical inputs
//! produce byte-identical files.

use spikemix_core::analysis::{Partition, SimilarityMatrix};
use spikemix_core::data::FeatureMatrix;
use spikemix_core::linalg::Mat;
use std::fmt::Write;

/// Ten distinguishable stroke colors, reused cyclically.
pub const PALETTE: [&str; 10] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#17becf", "#666666", "#bcbd22",
];

fn svg_open(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="{width:.0}" height="{height:.0}" fill="white"/>"#);
}

fn text(out: &mut String, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="{size:.0}" text-anchor="{anchor}">{s}</text>"#
    );
}

fn gray_level(p: f64) -> u8 {
    (p.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// One heatmap panel at the given origin. Rows/columns follow `order`;
/// runs of equal quantized gray merge into single rects.
fn heatmap_panel(out: &mut String, get: &dyn Fn(usize, usize) -> f64, n: usize, order: &[usize], x0: f64, y0: f64, side: f64) {
    let cell = side / n as f64;
    let _ = writeln!(out, r#"<rect x="{x0:.2}" y="{y0:.2}" width="{side:.2}" height="{side:.2}" fill="black"/>"#);
    for (row, &i) in order.iter().enumerate() {
        let y = y0 + row as f64 * cell;
        let mut col = 0;
        while col < n {
            let level = gray_level(get(i, order[col]));
            let mut run = 1;
            while col + run < n && gray_level(get(i, order[col + run])) == level {
                run += 1;
            }
            if level > 0 {
                let x = x0 + col as f64 * cell;
                let w = run as f64 * cell;
                let _ = writeln!(
                    out,
                    r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{:.2}" fill="#{level:02x}{level:02x}{level:02x}"/>"##,
                    cell
                );
            }
            col += run;
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{side:.2}" height="{side:.2}" fill="none" stroke="black" stroke-width="1"/>"#
    );
}

/// Similarity heatmap with observations ordered by `order` on both axes.
pub fn heatmap_svg(p: &SimilarityMatrix, order: &[usize], title: &str) -> String {
    let side = 560.0;
    let margin = 40.0;
    let mut out = String::new();
    svg_open(&mut out, side + 2.0 * margin, side + 2.0 * margin + 10.0);
    text(&mut out, margin + side / 2.0, margin - 12.0, 14.0, "middle", title);
    let n = p.n();
    heatmap_panel(&mut out, &|i, j| p.get(i, j), n, order, margin, margin, side);
    out.push_str("</svg>\n");
    out
}

/// Side-by-side heatmaps of the two samplers plus their agreement
/// matrix 1 − |ΔP|, sharing one observation ordering.
pub fn triptych_svg(p_ofm: &SimilarityMatrix, p_dpm: &SimilarityMatrix, comparison: &Mat, order: &[usize]) -> String {
    let side = 360.0;
    let margin = 36.0;
    let gap = 24.0;
    let width = 3.0 * side + 2.0 * gap + 2.0 * margin;
    let mut out = String::new();
    svg_open(&mut out, width, side + 2.0 * margin + 12.0);
    let titles = ["a) OFM", "b) DPM", "c) Comparison"];
    let n = p_ofm.n();
    for (panel, title) in titles.iter().enumerate() {
        let x0 = margin + panel as f64 * (side + gap);
        text(&mut out, x0 + side / 2.0, margin - 10.0, 13.0, "middle", title);
        match panel {
            0 => heatmap_panel(&mut out, &|i, j| p_ofm.get(i, j), n, order, x0, margin, side),
            1 => heatmap_panel(&mut out, &|i, j| p_dpm.get(i, j), n, order, x0, margin, side),
            _ => heatmap_panel(&mut out, &|i, j| comparison[(i, j)], n, order, x0, margin, side),
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One histogram panel per feature column.
pub fn histogram_panels_svg(x: &FeatureMatrix, bins: usize) -> String {
    let r = x.r();
    let panel_w = 240.0;
    let panel_h = 180.0;
    let margin = 36.0;
    let gap = 20.0;
    let cols = r.min(4).max(1);
    let rows = r.div_ceil(cols);
    let width = margin * 2.0 + cols as f64 * panel_w + (cols - 1) as f64 * gap;
    let height = margin * 2.0 + rows as f64 * (panel_h + 26.0) + (rows - 1) as f64 * gap;
    let mut out = String::new();
    svg_open(&mut out, width, height);
    for j in 0..r {
        let grid_x = j % cols;
        let grid_y = j / cols;
        let x0 = margin + grid_x as f64 * (panel_w + gap);
        let y0 = margin + grid_y as f64 * (panel_h + 26.0 + gap) + 16.0;
        let values: Vec<f64> = (0..x.n()).map(|i| x.row(i)[j]).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-12);
        let mut counts = vec![0usize; bins];
        for v in &values {
            let b = (((v - lo) / span) * bins as f64) as usize;
            counts[b.min(bins - 1)] += 1;
        }
        let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
        text(&mut out, x0 + panel_w / 2.0, y0 - 6.0, 12.0, "middle", &format!("PC {}", j + 1));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.1}" y="{y0:.1}" width="{panel_w:.1}" height="{panel_h:.1}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        let bar_w = panel_w / bins as f64;
        for (b, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let h = panel_h * (c as f64 / peak);
            let bx = x0 + b as f64 * bar_w;
            let by = y0 + panel_h - h;
            let _ = writeln!(
                out,
                r##"<rect x="{bx:.2}" y="{by:.2}" width="{bar_w:.2}" height="{h:.2}" fill="#7a9bbf" stroke="none"/>"##
            );
        }
        text(&mut out, x0, y0 + panel_h + 14.0, 10.0, "start", &format!("{lo:.2}"));
        text(&mut out, x0 + panel_w, y0 + panel_h + 14.0, 10.0, "end", &format!("{hi:.2}"));
    }
    out.push_str("</svg>\n");
    out
}

/// One frame per cluster of `partition` (largest first); every
/// observation in the frame is a polyline over `curves` columns,
/// stroked by `color_by` when given, otherwise by its own cluster.
pub fn cluster_frames_svg(curves: &Mat, partition: &Partition, color_by: Option<&Partition>) -> String {
    let ordered = partition.by_descending_size();
    let k = ordered.num_clusters();
    let panel_w = 260.0;
    let panel_h = 180.0;
    let margin = 36.0;
    let gap = 18.0;
    let cols = k.min(4).max(1);
    let rows = k.div_ceil(cols);
    let width = margin * 2.0 + cols as f64 * panel_w + (cols - 1) as f64 * gap;
    let height = margin * 2.0 + rows as f64 * (panel_h + 26.0) + (rows - 1) as f64 * gap;
    let mut out = String::new();
    svg_open(&mut out, width, height);
    let lo = curves.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = curves.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let s = curves.cols();
    let mut sizes = vec![0usize; k];
    for &l in ordered.labels() {
        sizes[l] += 1;
    }
    for c in 0..k {
        let grid_x = c % cols;
        let grid_y = c / cols;
        let x0 = margin + grid_x as f64 * (panel_w + gap);
        let y0 = margin + grid_y as f64 * (panel_h + 26.0 + gap) + 16.0;
        text(
            &mut out,
            x0 + panel_w / 2.0,
            y0 - 6.0,
            12.0,
            "middle",
            &format!("cluster {} (n = {})", c + 1, sizes[c]),
        );
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.1}" y="{y0:.1}" width="{panel_w:.1}" height="{panel_h:.1}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for (i, &label) in ordered.labels().iter().enumerate() {
            if label != c {
                continue;
            }
            let stroke = match color_by {
                Some(other) => PALETTE[other.labels()[i] % PALETTE.len()],
                None => PALETTE[c % PALETTE.len()],
            };
            let mut points = String::new();
            for t in 0..s {
                let px = x0 + panel_w * (t as f64 / (s - 1).max(1) as f64);
                let py = y0 + panel_h * (1.0 - (curves[(i, t)] - lo) / span);
                let _ = write!(points, "{px:.2},{py:.2} ");
            }
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="0.8" stroke-opacity="0.75"/>"#,
                points.trim_end()
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
