//! Lloyd's algorithm with k-means++ seeding, used to initialize the
//! allocation vectors of both samplers.

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::Open01;

const MAX_SWEEPS: usize = 100;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster `x` into `k` groups; returns 0-based labels of length n.
///
/// k-means++ seeding, at most 100 Lloyd sweeps or until assignments
/// stabilize. A cluster left empty after an assignment pass is
/// re-seeded from the point farthest from its current center.
pub fn kmeans(x: &FeatureMatrix, k: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let n = x.n();
    let r = x.r();
    if k == 0 {
        return Err(Error::InvalidParameter("k-means requires K >= 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }

    // k-means++: first center uniform, then proportional to squared
    // distance from the nearest chosen center. If every remaining
    // distance is zero (duplicate points), fall back to a uniform pick
    // among indices not already chosen.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = (rng.sample::<f64, _>(Open01) * n as f64) as usize % n;
    centers.push(x.row(first).to_vec());
    chosen[first] = true;
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.sample::<f64, _>(Open01) * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[(rng.sample::<f64, _>(Open01) * free.len() as f64) as usize % free.len()]
        };
        chosen[idx] = true;
        centers.push(x.row(idx).to_vec());
        let c = centers.last().unwrap();
        for i in 0..n {
            let d = sq_dist(x.row(i), c);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }

    let mut labels = vec![0usize; n];
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for i in 0..n {
            let row = x.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(row, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }

        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; r]; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for j in 0..r {
                sums[labels[i]][j] += x.row(i)[j];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // steal the point farthest from its own center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(x.row(a), &centers[labels[a]]);
                        let db = sq_dist(x.row(b), &centers[labels[b]]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                let old = labels[far];
                counts[old] -= 1;
                for j in 0..r {
                    sums[old][j] -= x.row(far)[j];
                }
                labels[far] = c;
                counts[c] = 1;
                sums[c] = x.row(far).to_vec();
                changed = true;
            }
        }
        for c in 0..k {
            for j in 0..r {
                centers[c][j] = sums[c][j] / counts[c] as f64;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(labels)
}

/// Within-cluster sum of squares about cluster means.
pub fn wcss(x: &FeatureMatrix, labels: &[usize]) -> f64 {
    let n = x.n();
    let r = x.r();
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0usize; k];
    let mut means = vec![vec![0.0; r]; k];
    for i in 0..n {
        counts[labels[i]] += 1;
        for j in 0..r {
            means[labels[i]][j] += x.row(i)[j];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..r {
                means[c][j] /= counts[c] as f64;
            }
        }
    }
    (0..n).map(|i| sq_dist(x.row(i), &means[labels[i]])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureMatrix;

    fn two_clouds() -> FeatureMatrix {
        let mut rows = Vec::new();
        for i in 0..50 {
            let t = (i as f64) * 0.01;
            rows.push(vec![t.sin() * 0.1, t.cos() * 0.1]);
            rows.push(vec![10.0 + t.sin() * 0.1, 10.0 + t.cos() * 0.1]);
        }
        FeatureMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn separable_recovery() {
        let x = two_clouds();
        let labels = kmeans(&x, 2, &mut RngStream::new(0, 0)).unwrap();
        // even rows are cloud A, odd rows cloud B
        let a = labels[0];
        for (i, &l) in labels.iter().enumerate() {
            if i % 2 == 0 {
                assert_eq!(l, a);
            } else {
                assert_ne!(l, a);
            }
        }
    }

    #[test]
    fn k_equals_n() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let labels = kmeans(&x, 8, &mut RngStream::new(1, 0)).unwrap();
        let mut seen = labels.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 8, "each point its own cluster: {labels:?}");
    }

    #[test]
    fn k_greater_than_n_errors() {
        let x = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(kmeans(&x, 3, &mut RngStream::new(2, 0)), Err(Error::TooManyClusters { .. })));
    }

    #[test]
    fn beats_random_partitions() {
        use crate::synthetic::{generate_synthetic_mixture, SyntheticSpec};
        let spec = SyntheticSpec::well_separated_demo(300);
        let (x, _) = generate_synthetic_mixture(&spec, &mut RngStream::new(3, 0)).unwrap();
        let labels = kmeans(&x, 10, &mut RngStream::new(3, 1)).unwrap();
        let fitted = wcss(&x, &labels);
        let mut rng = RngStream::new(3, 2);
        for _ in 0..100 {
            let random: Vec<usize> = (0..x.n()).map(|_| (rng.sample::<f64, _>(Open01) * 10.0) as usize % 10).collect();
            assert!(fitted <= wcss(&x, &random));
        }
    }
}
