//! Partition quality scores computed from the dissimilarity matrix.
//!
//! Rejected items never contribute: every score iterates clusters only.

use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::dtw::DissimilarityMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub db_original: f64,
    pub db_modified: f64,
    pub silhouette: f64,
    pub spread_on_cluster: f64,
    pub k_effective: usize,
    pub n_clustered: usize,
    pub n_rejected: usize,
}

impl ValidityReport {
    pub fn compute(partition: &Partition, matrix: &DissimilarityMatrix) -> Result<Self> {
        Ok(Self {
            db_original: db_original(partition, matrix)?,
            db_modified: db_modified(partition, matrix)?,
            silhouette: silhouette(partition, matrix)?,
            spread_on_cluster: spread_on_cluster(partition, matrix)?,
            k_effective: partition.k_effective(),
            n_clustered: partition.n_clustered(),
            n_rejected: partition.n_rejected(),
        })
    }
}

/// `R_ij = (s_i + s_j) / d(m_i, m_j)` for every ordered pair `i ≠ j`.
fn similarity_ratios(partition: &Partition, matrix: &DissimilarityMatrix) -> Result<Vec<Vec<f64>>> {
    let clusters = partition.clusters();
    if clusters.len() < 2 {
        return Err(Error::TooFewClusters {
            needed: 2,
            got: clusters.len(),
        });
    }
    let mut r = vec![vec![0.0; clusters.len()]; clusters.len()];
    for (i, ci) in clusters.iter().enumerate() {
        for (j, cj) in clusters.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = matrix.get(ci.medoid, cj.medoid);
            if d == 0.0 {
                return Err(Error::CoincidentMedoids {
                    a: ci.medoid,
                    b: cj.medoid,
                });
            }
            r[i][j] = (ci.spread + cj.spread) / d;
        }
    }
    Ok(r)
}

/// Davies-Bouldin: mean over clusters of the worst `R_ij`.
pub fn db_original(partition: &Partition, matrix: &DissimilarityMatrix) -> Result<f64> {
    let r = similarity_ratios(partition, matrix)?;
    let nc = r.len();
    let total: f64 = r
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    Ok(total / nc as f64)
}

/// Davies-Bouldin averaged over every off-diagonal `R_ij` instead of the
/// per-cluster maximum.
pub fn db_modified(partition: &Partition, matrix: &DissimilarityMatrix) -> Result<f64> {
    let r = similarity_ratios(partition, matrix)?;
    let nc = r.len() as f64;
    let total: f64 = r.iter().flatten().sum();
    Ok(total / (nc * (nc - 1.0)))
}

/// Mean silhouette over clustered items. Members of single-item clusters
/// score 0.
pub fn silhouette(partition: &Partition, matrix: &DissimilarityMatrix) -> Result<f64> {
    let clusters = partition.clusters();
    if clusters.len() < 2 {
        return Err(Error::TooFewClusters {
            needed: 2,
            got: clusters.len(),
        });
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (ci, own) in clusters.iter().enumerate() {
        for &i in &own.members {
            count += 1;
            if own.len() == 1 {
                continue;
            }
            let row = matrix.row(i);
            let a = own.members.iter().map(|&j| row[j]).sum::<f64>() / (own.len() - 1) as f64;
            let b = clusters
                .iter()
                .enumerate()
                .filter(|&(cj, _)| cj != ci)
                .map(|(_, c)| c.members.iter().map(|&j| row[j]).sum::<f64>() / c.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / count as f64)
}

/// Mean over clusters of (largest intra-cluster distance / cluster size).
pub fn spread_on_cluster(partition: &Partition, matrix: &DissimilarityMatrix) -> Result<f64> {
    let clusters = partition.clusters();
    if clusters.is_empty() {
        return Err(Error::TooFewClusters { needed: 1, got: 0 });
    }
    let total: f64 = clusters
        .iter()
        .map(|c| {
            let mut max = 0.0f64;
            for (a, &i) in c.members.iter().enumerate() {
                let row = matrix.row(i);
                for &j in &c.members[a + 1..] {
                    max = max.max(row[j]);
                }
            }
            max / c.len() as f64
        })
        .sum();
    Ok(total / clusters.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> DissimilarityMatrix {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v[i * n + j] = f(i.min(j), i.max(j));
                }
            }
        }
        DissimilarityMatrix::from_dense(n, v).unwrap()
    }

    #[test]
    fn two_pairs_silhouette() {
        let m = matrix(4, |i, j| if i / 2 == j / 2 { 1.0 } else { 10.0 });
        let p = Partition::from_groups(4, vec![vec![0, 1], vec![2, 3]], &m, 2).unwrap();
        assert!((silhouette(&p, &m).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn duplicated_clusters_silhouette_zero() {
        let m = matrix(4, |_, _| 1.0);
        let p = Partition::from_groups(4, vec![vec![0, 1], vec![2, 3]], &m, 2).unwrap();
        assert_eq!(silhouette(&p, &m).unwrap(), 0.0);
    }

    #[test]
    fn db_two_clusters_closed_form() {
        // Medoids at distance 4, spreads 1 each: pairs {0,1}, {2,3}; medoid 0 / 2.
        // d(0,1) = 2 → spread 1.
        let m = matrix(4, |i, j| match (i, j) {
            (0, 1) | (2, 3) => 2.0,
            _ => 4.0,
        });
        let p = Partition::from_groups(4, vec![vec![0, 1], vec![2, 3]], &m, 2).unwrap();
        assert_eq!(p.clusters()[0].spread, 1.0);
        assert_eq!(db_original(&p, &m).unwrap(), 0.5);
        assert_eq!(db_modified(&p, &m).unwrap(), 0.5);
    }

    #[test]
    fn db_three_symmetric_clusters() {
        let m = matrix(6, |i, j| if i / 2 == j / 2 { 2.0 } else { 4.0 });
        let p = Partition::from_groups(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]], &m, 3).unwrap();
        assert_eq!(db_modified(&p, &m).unwrap(), 0.5);
        assert_eq!(db_original(&p, &m).unwrap(), 0.5);
    }

    #[test]
    fn db_zero_spreads() {
        let m = matrix(3, |_, _| 3.0);
        let p = Partition::from_groups(3, vec![vec![0], vec![1], vec![2]], &m, 3).unwrap();
        assert_eq!(db_original(&p, &m).unwrap(), 0.0);
    }

    #[test]
    fn coincident_medoids_error() {
        let m = matrix(2, |_, _| 0.0);
        let p = Partition::from_groups(2, vec![vec![0], vec![1]], &m, 2).unwrap();
        assert!(matches!(
            db_original(&p, &m),
            Err(Error::CoincidentMedoids { a: 0, b: 1 })
        ));
    }

    #[test]
    fn single_cluster_errors() {
        let m = matrix(3, |_, _| 1.0);
        let p = Partition::from_groups(3, vec![vec![0, 1, 2]], &m, 1).unwrap();
        assert!(silhouette(&p, &m).is_err());
        assert!(db_modified(&p, &m).is_err());
        assert_eq!(spread_on_cluster(&p, &m).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn spread_on_cluster_simple() {
        let m = matrix(4, |i, j| {
            if (i, j) == (0, 1) {
                3.0
            } else if (i, j) == (2, 3) {
                0.0
            } else {
                9.0
            }
        });
        let p = Partition::from_groups(4, vec![vec![0, 1]], &m, 1).unwrap();
        assert_eq!(spread_on_cluster(&p, &m).unwrap(), 1.5);
        let dup = Partition::from_groups(4, vec![vec![2, 3]], &m, 1).unwrap();
        assert_eq!(spread_on_cluster(&dup, &m).unwrap(), 0.0);
    }
}
