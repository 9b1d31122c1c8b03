//! Posterior summaries over allocation traces: occupied-count
//! distributions, pairwise co-clustering probabilities, and optimal
//! partitions under the posterior expected adjusted Rand criterion.

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::linalg::Mat;
use crate::trace::AllocationTrace;
use std::collections::{BTreeMap, HashMap, HashSet};

/// Posterior pairwise co-clustering probabilities, symmetric with unit
/// diagonal.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    n: usize,
    p: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_values(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: p.len() });
        }
        let s = Self { n, p };
        for i in 0..n {
            if (s.get(i, i) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("similarity diagonal entry {i} is not 1")));
            }
            for j in 0..n {
                let v = s.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!("similarity entry ({i},{j}) = {v} outside [0,1]")));
                }
                if (v - s.get(j, i)).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!("similarity not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    /// Binary similarity induced by a single partition.
    pub fn from_partition(partition: &Partition) -> Self {
        let labels = partition.labels();
        let n = labels.len();
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                p[i * n + j] = if labels[i] == labels[j] { 1.0 } else { 0.0 };
            }
        }
        Self { n, p }
    }
}

/// A clustering of n observations: contiguous 0-based labels in
/// first-occurrence order, every label used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl Partition {
    /// Canonicalize arbitrary labels by first occurrence, so `{2,2,1}`
    /// and `{1,1,2}` become the same partition.
    pub fn new(raw: &[usize]) -> Self {
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &l in raw {
            let next = map.len();
            let id = *map.entry(l).or_insert(next);
            labels.push(id);
        }
        Self { labels, num_clusters: map.len() }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    /// Cluster sizes in decreasing order, the reporting convention.
    pub fn sizes_desc(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Relabel so cluster 0 is the largest, for table/figure output.
    pub fn by_descending_size(&self) -> Partition {
        let mut sizes = vec![0usize; self.num_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        let mut order: Vec<usize> = (0..self.num_clusters).collect();
        order.sort_by_key(|&c| std::cmp::Reverse(sizes[c]));
        let mut rank = vec![0usize; self.num_clusters];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        Partition {
            labels: self.labels.iter().map(|&l| rank[l]).collect(),
            num_clusters: self.num_clusters,
        }
    }
}

/// Histogram of occupied-component counts over kept iterations.
#[derive(Debug, Clone)]
pub struct OccupiedCountDistribution {
    pub table: BTreeMap<usize, f64>,
}

impl OccupiedCountDistribution {
    pub fn modal_count(&self) -> usize {
        // ties break toward fewer occupied components
        let mut best = (0usize, f64::NEG_INFINITY);
        for (&count, &prop) in &self.table {
            if prop > best.1 {
                best = (count, prop);
            }
        }
        best.0
    }

    /// Width of {count : proportion >= threshold}, max − min.
    pub fn support_width(&self, threshold: f64) -> usize {
        let counts: Vec<usize> = self
            .table
            .iter()
            .filter(|(_, &p)| p >= threshold)
            .map(|(&c, _)| c)
            .collect();
        match (counts.iter().min(), counts.iter().max()) {
            (Some(&lo), Some(&hi)) => hi - lo,
            _ => 0,
        }
    }
}

/// P[i,j] = fraction of kept iterations allocating i and j together.
pub fn pairwise_similarity(trace: &AllocationTrace) -> Result<SimilarityMatrix> {
    pairwise_similarity_mode(trace, ExecMode::default())
}

/// As [`pairwise_similarity`] with an explicit execution mode. Counts
/// accumulate as integers, so parallel and sequential results are
/// bit-identical.
pub fn pairwise_similarity_mode(trace: &AllocationTrace, mode: ExecMode) -> Result<SimilarityMatrix> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("similarity requires a non-empty trace".into()));
    }
    let n = trace.n();
    let draws = &trace.draws;
    let counts = exec::fold_chunks(
        mode,
        draws.len(),
        64,
        || vec![0u32; n * (n + 1) / 2],
        |acc, t| {
            let draw = &draws[t];
            // bucket indices by label, then count within-bucket pairs
            let k = draw.iter().max().map_or(0, |&m| m + 1);
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k];
            for (i, &z) in draw.iter().enumerate() {
                buckets[z].push(i);
            }
            for bucket in &buckets {
                for (a, &i) in bucket.iter().enumerate() {
                    let base = i * n - i * (i + 1) / 2;
                    for &j in &bucket[a..] {
                        acc[base + j] += 1;
                    }
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    let total = draws.len() as f64;
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        let base = i * n - i * (i + 1) / 2;
        for j in i..n {
            let v = counts[base + j] as f64 / total;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    SimilarityMatrix::from_values(n, p)
}

/// Normalized histogram of per-iteration occupied counts.
pub fn occupied_distribution(trace: &AllocationTrace) -> Result<OccupiedCountDistribution> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("occupied distribution requires a non-empty trace".into()));
    }
    let mut table: BTreeMap<usize, f64> = BTreeMap::new();
    for &c in &trace.occupied_counts {
        *table.entry(c).or_insert(0.0) += 1.0;
    }
    let total = trace.occupied_counts.len() as f64;
    for v in table.values_mut() {
        *v /= total;
    }
    Ok(OccupiedCountDistribution { table })
}

fn choose2(n: usize) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Hubert–Arabie adjusted Rand index between two partitions.
///
/// Identical partitions score 1; a pairing of a nontrivial partition
/// with the single-cluster partition scores 0 under the adjusted
/// formula's degenerate convention (expected index equals the observed
/// one).
pub fn adjusted_rand(a: &Partition, b: &Partition) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    let mut contingency: HashMap<(usize, usize), usize> = HashMap::new();
    let mut row: HashMap<usize, usize> = HashMap::new();
    let mut col: HashMap<usize, usize> = HashMap::new();
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        *contingency.entry((la, lb)).or_insert(0) += 1;
        *row.entry(la).or_insert(0) += 1;
        *col.entry(lb).or_insert(0) += 1;
    }
    let sum_cells: f64 = contingency.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = row.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = col.values().map(|&c| choose2(c)).sum();
    let pairs = choose2(a.n());
    let expected = sum_a * sum_b / pairs;
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        // both trivial in the same way: treat as perfect agreement
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / (max_index - expected))
}

/// Posterior expected adjusted Rand of a candidate partition against a
/// similarity matrix:
/// [Σ c·p − (Σc)(Σp)/M] / [½(Σc + Σp) − (Σc)(Σp)/M] over pairs i < j.
///
/// A degenerate zero denominator (candidate and similarity both trivial
/// in opposite or matching extremes) falls back to the unadjusted pair
/// agreement Σ [c·p + (1−c)(1−p)] normalized by M.
pub fn pear_score(candidate: &Partition, p: &SimilarityMatrix) -> Result<f64> {
    let n = p.n();
    if candidate.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: candidate.n() });
    }
    let labels = candidate.labels();
    let mut sum_cp = 0.0;
    let mut sum_c = 0.0;
    let mut sum_p = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let pij = p.get(i, j);
            sum_p += pij;
            if labels[i] == labels[j] {
                sum_c += 1.0;
                sum_cp += pij;
            }
        }
    }
    let m = choose2(n);
    let expected = sum_c * sum_p / m;
    let denom = 0.5 * (sum_c + sum_p) - expected;
    if denom == 0.0 {
        let agreement = 2.0 * sum_cp - sum_c - sum_p + m;
        return Ok(agreement / m);
    }
    Ok((sum_cp - expected) / denom)
}

/// Argmax of [`pear_score`] over the candidates; ties break toward
/// fewer clusters, then first-seen.
pub fn pear_optimal(p: &SimilarityMatrix, candidates: &[Partition]) -> Result<Partition> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("PEAR needs at least one candidate partition".into()));
    }
    let mut best: Option<(f64, usize, usize)> = None; // (score, clusters, index)
    for (idx, cand) in candidates.iter().enumerate() {
        let score = pear_score(cand, p)?;
        let better = match best {
            None => true,
            Some((s, k, _)) => score > s || (score == s && cand.num_clusters() < k),
        };
        if better {
            best = Some((score, cand.num_clusters(), idx));
        }
    }
    Ok(candidates[best.unwrap().2].clone())
}

/// Average-linkage agglomerative clustering on distance 1 − P,
/// returning one partition per requested cluster count.
pub fn average_linkage_cuts(p: &SimilarityMatrix, max_clusters: usize) -> Vec<Partition> {
    let n = p.n();
    let mut dist = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            dist[(i, j)] = 1.0 - p.get(i, j);
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut cuts = Vec::new();
    let mut clusters = n;

    let record = |members: &[Vec<usize>], active: &[bool], cuts: &mut Vec<Partition>| {
        let mut labels = vec![0usize; n];
        for (c, group) in members.iter().enumerate().filter(|(c, _)| active[*c]) {
            for &i in group {
                labels[i] = c;
            }
        }
        cuts.push(Partition::new(&labels));
    };

    if clusters <= max_clusters {
        record(&members, &active, &mut cuts);
    }
    while clusters > 1 {
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && dist[(i, j)] < best.0 {
                    best = (dist[(i, j)], i, j);
                }
            }
        }
        let (_, i, j) = best;
        // Lance–Williams update for average linkage
        for k in 0..n {
            if active[k] && k != i && k != j {
                let d = (size[i] as f64 * dist[(i, k)] + size[j] as f64 * dist[(j, k)]) / (size[i] + size[j]) as f64;
                dist[(i, k)] = d;
                dist[(k, i)] = d;
            }
        }
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        size[i] += size[j];
        active[j] = false;
        clusters -= 1;
        if clusters <= max_clusters {
            record(&members, &active, &mut cuts);
        }
    }
    cuts.reverse(); // K = 1 first
    cuts
}

/// Candidate set for PEAR search: the distinct partitions visited by
/// the trace plus average-linkage cuts of 1 − P for 1..=10 clusters,
/// de-duplicated.
pub fn candidate_partitions(trace: &AllocationTrace, p: &SimilarityMatrix) -> Result<Vec<Partition>> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("candidate extraction requires a non-empty trace".into()));
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out: Vec<Partition> = Vec::new();
    for draw in &trace.draws {
        let part = Partition::new(draw);
        if seen.insert(part.labels().to_vec()) {
            out.push(part);
        }
    }
    for cut in average_linkage_cuts(p, 10.min(p.n())) {
        if seen.insert(cut.labels().to_vec()) {
            out.push(cut);
        }
    }
    Ok(out)
}

/// The finite-mixture point estimate: restrict the trace to iterations
/// whose occupied count equals the modal count (ties toward fewer), and
/// run PEAR over that sub-trace's distinct partitions against the
/// similarity matrix recomputed from the same sub-trace.
pub fn ofm_modal_partition(trace: &AllocationTrace) -> Result<Partition> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("modal partition requires a non-empty trace".into()));
    }
    let modal = occupied_distribution(trace)?.modal_count();
    let keep: Vec<usize> = (0..trace.len()).filter(|&t| trace.occupied_counts[t] == modal).collect();
    let restricted = AllocationTrace {
        draws: keep.iter().map(|&t| trace.draws[t].clone()).collect(),
        occupied_counts: keep.iter().map(|&t| trace.occupied_counts[t]).collect(),
        weight_sums: Vec::new(),
        burn_in: trace.burn_in,
        swap_acceptance: Vec::new(),
        represented_counts: Vec::new(),
        concentrations: Vec::new(),
    };
    let p = pairwise_similarity(&restricted)?;
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut candidates: Vec<Partition> = Vec::new();
    for draw in &restricted.draws {
        let part = Partition::new(draw);
        if seen.insert(part.labels().to_vec()) {
            candidates.push(part);
        }
    }
    pear_optimal(&p, &candidates)
}

/// Elementwise 1 − |P_a − P_b| plus the off-diagonal mean absolute
/// difference.
pub fn compare_similarity(p_a: &SimilarityMatrix, p_b: &SimilarityMatrix) -> Result<(Mat, f64)> {
    let n = p_a.n();
    if p_b.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p_b.n() });
    }
    let mut out = Mat::zeros(n, n);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = (p_a.get(i, j) - p_b.get(i, j)).abs();
            out[(i, j)] = 1.0 - d;
            if i != j {
                acc += d;
            }
        }
    }
    let mean = if n > 1 { acc / (n * (n - 1)) as f64 } else { 0.0 };
    Ok((out, mean))
}
