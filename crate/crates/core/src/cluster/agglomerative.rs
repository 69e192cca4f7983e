//! Average-linkage agglomerative clustering over a precomputed matrix.
//!
//! Candidate merges live in a binary heap; entries are invalidated lazily by
//! a per-cluster version counter, giving `O(n² log n)` overall. Cluster ids
//! are their smallest member index, and equal linkages resolve to the
//! lexicographically lowest id pair.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::cluster::Partition;
use crate::dtw::DissimilarityMatrix;
use crate::error::{Error, Result};

/// One merge of the dendrogram: clusters `a < b` joined at `distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    a: usize,
    b: usize,
    version_a: u32,
    version_b: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
            .then(self.version_a.cmp(&other.version_a))
            .then(self.version_b.cmp(&other.version_b))
    }
}

/// Merges from `n` singletons down to `k` clusters and returns the final
/// member groups along with the merge history.
pub fn agglomerate(matrix: &DissimilarityMatrix, k: usize) -> Result<(Vec<Vec<usize>>, Vec<MergeStep>)> {
    let n = matrix.len();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, min: 1, max: n });
    }

    // sums[a * n + c]: total cross distance between clusters a and c.
    let mut sums: Vec<f64> = (0..n).flat_map(|i| matrix.row(i).to_vec()).collect();
    let mut size = vec![1usize; n];
    let mut alive = vec![true; n];
    let mut version = vec![0u32; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    let mut heap = BinaryHeap::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            heap.push(Reverse(Candidate {
                distance: matrix.get(a, b),
                a,
                b,
                version_a: 0,
                version_b: 0,
            }));
        }
    }

    let mut steps = Vec::with_capacity(n - k);
    let mut remaining = n;
    while remaining > k {
        let Reverse(c) = heap.pop().expect("heap holds a valid pair while >1 cluster remains");
        if !alive[c.a] || !alive[c.b] || version[c.a] != c.version_a || version[c.b] != c.version_b {
            continue;
        }
        let (a, b) = (c.a, c.b);
        for other in 0..n {
            if !alive[other] || other == a || other == b {
                continue;
            }
            let s = sums[a * n + other] + sums[b * n + other];
            sums[a * n + other] = s;
            sums[other * n + a] = s;
        }
        size[a] += size[b];
        alive[b] = false;
        version[a] += 1;
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        remaining -= 1;
        steps.push(MergeStep {
            a,
            b,
            distance: c.distance,
        });

        for other in 0..n {
            if !alive[other] || other == a {
                continue;
            }
            let linkage = sums[a * n + other] / (size[a] * size[other]) as f64;
            let (lo, hi) = if a < other { (a, other) } else { (other, a) };
            heap.push(Reverse(Candidate {
                distance: linkage,
                a: lo,
                b: hi,
                version_a: version[lo],
                version_b: version[hi],
            }));
        }
    }

    let groups = (0..n)
        .filter(|&i| alive[i])
        .map(|i| {
            let mut g = std::mem::take(&mut members[i]);
            g.sort_unstable();
            g
        })
        .collect();
    Ok((groups, steps))
}

/// Average-linkage agglomerative clustering into `k` clusters.
pub fn agglomerative(matrix: &DissimilarityMatrix, k: usize) -> Result<Partition> {
    let (groups, _) = agglomerate(matrix, k)?;
    Partition::from_groups(matrix.len(), groups, matrix, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_matrix(xs: &[f64]) -> DissimilarityMatrix {
        let n = xs.len();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                v[i * n + j] = (xs[i] - xs[j]).abs();
            }
        }
        DissimilarityMatrix::from_dense(n, v).unwrap()
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let m = line_matrix(&[0.0, 1.0, 3.0, 7.0]);
        let p = agglomerative(&m, 4).unwrap();
        assert_eq!(p.k_effective(), 4);
        assert!(p.clusters().iter().all(|c| c.len() == 1 && c.spread == 0.0));
    }

    #[test]
    fn k_one_takes_everything() {
        let m = line_matrix(&[0.0, 1.0, 3.0, 7.0]);
        let p = agglomerative(&m, 1).unwrap();
        assert_eq!(p.groups(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn out_of_range() {
        let m = line_matrix(&[0.0, 1.0]);
        assert!(agglomerative(&m, 0).is_err());
        assert!(agglomerative(&m, 3).is_err());
    }

    #[test]
    fn two_blobs() {
        let m = line_matrix(&[0.0, 0.05, 0.1, 0.02, 6.0, 6.04, 6.1]);
        let p = agglomerative(&m, 2).unwrap();
        assert_eq!(p.groups(), vec![vec![0, 1, 2, 3], vec![4, 5, 6]]);
        p.validate(&m).unwrap();
    }

    #[test]
    fn ties_merge_lowest_pair_first() {
        // All distances equal: merges should always pick ids (0, next).
        let n = 4;
        let mut v = vec![1.0; n * n];
        for i in 0..n {
            v[i * n + i] = 0.0;
        }
        let m = DissimilarityMatrix::from_dense(n, v).unwrap();
        let (_, steps) = agglomerate(&m, 1).unwrap();
        let pairs: Vec<(usize, usize)> = steps.iter().map(|s| (s.a, s.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3)]);
    }
}
