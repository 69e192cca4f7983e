//! Row-wise dissimilarity-matrix clustering.
//!
//! Every remaining row is split into groups by 1-D k-means over its
//! distances to the remaining items. Each row nominates its lowest-center
//! group (the items nearest to it), and the nomination with the globally
//! smallest center is extracted as a cluster. Extraction repeats on the
//! reduced matrix until `k` clusters exist; anything left over joins the
//! cluster with the nearest medoid.

use crate::cluster::{Cluster, Partition};
use crate::dtw::DissimilarityMatrix;
use crate::error::{Error, Result};

pub const KMEANS_MAX_ITERATIONS: usize = 50;

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Result of a 1-D k-means run on sorted values: group `t` covers
/// `bounds[t]..bounds[t + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans1d {
    pub centers: Vec<f64>,
    pub bounds: Vec<usize>,
}

impl KMeans1d {
    pub fn group(&self, t: usize) -> std::ops::Range<usize> {
        self.bounds[t]..self.bounds[t + 1]
    }
}

/// Lloyd iterations on ascending `sorted` values with `g` centers started at
/// the `(t + 0.5) / g` quantiles. Groups are contiguous; a value equidistant
/// from two centers joins the lower one.
pub fn kmeans_1d(sorted: &[f64], g: usize) -> KMeans1d {
    assert!(g >= 1 && !sorted.is_empty());
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    for &v in sorted {
        prefix.push(prefix.last().unwrap() + v);
    }
    let mut centers: Vec<f64> = (0..g)
        .map(|t| quantile_sorted(sorted, (t as f64 + 0.5) / g as f64))
        .collect();
    let mut bounds = vec![0; g + 1];

    for _ in 0..KMEANS_MAX_ITERATIONS {
        bounds[0] = 0;
        bounds[g] = sorted.len();
        for t in 0..g - 1 {
            let mid = 0.5 * (centers[t] + centers[t + 1]);
            bounds[t + 1] = sorted.partition_point(|&v| v <= mid).max(bounds[t]);
        }
        let mut changed = false;
        for t in 0..g {
            let (lo, hi) = (bounds[t], bounds[t + 1]);
            if hi > lo {
                let c = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
                if c != centers[t] {
                    centers[t] = c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    KMeans1d { centers, bounds }
}

/// The lowest-center non-empty group of row `i` restricted to `remaining`.
fn row_candidate(matrix: &DissimilarityMatrix, i: usize, remaining: &[usize], g: usize) -> (f64, Vec<usize>) {
    let row = matrix.row(i);
    let mut entries: Vec<(f64, usize)> = remaining.iter().map(|&j| (row[j], j)).collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let values: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let km = kmeans_1d(&values, g);
    let t = (0..g)
        .filter(|&t| !km.group(t).is_empty())
        .min_by(|&a, &b| km.centers[a].total_cmp(&km.centers[b]).then(a.cmp(&b)))
        .expect("at least one non-empty group");
    let members = entries[km.group(t)].iter().map(|e| e.1).collect();
    (km.centers[t], members)
}

pub fn dissim_row_clustering(matrix: &DissimilarityMatrix, k: usize) -> Result<Partition> {
    let n = matrix.len();
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, min: 2, max: n });
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut clusters: Vec<Cluster> = Vec::new();

    while clusters.len() < k && !remaining.is_empty() {
        let g = k.min(remaining.len());
        let mut best: Option<(f64, Vec<usize>)> = None;
        for &i in &remaining {
            let (center, members) = row_candidate(matrix, i, &remaining, g);
            if best.as_ref().is_none_or(|b| center < b.0) {
                best = Some((center, members));
            }
        }
        let (_, members) = best.expect("remaining is non-empty");
        remaining.retain(|j| !members.contains(j));
        clusters.push(Cluster::from_members(members, matrix)?);
    }

    if clusters.len() < k {
        log::debug!(
            "dissimilarity clustering ran out of rows: {} of {k} clusters",
            clusters.len()
        );
    }

    let mut groups: Vec<Vec<usize>> = clusters.iter().map(|c| c.members.clone()).collect();
    for &j in &remaining {
        let target = clusters
            .iter()
            .enumerate()
            .min_by(|(a, ca), (b, cb)| {
                matrix
                    .get(j, ca.medoid)
                    .total_cmp(&matrix.get(j, cb.medoid))
                    .then(a.cmp(b))
            })
            .map(|(ci, _)| ci)
            .expect("at least one cluster was extracted");
        groups[target].push(j);
    }
    Partition::from_groups(n, groups, matrix, k)
}
