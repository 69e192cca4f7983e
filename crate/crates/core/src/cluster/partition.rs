use serde::{Deserialize, Serialize};

use crate::dtw::{cluster_spread, medoid, DissimilarityMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Sorted trajectory indices.
    pub members: Vec<usize>,
    pub medoid: usize,
    pub spread: f64,
}

impl Cluster {
    pub fn from_members(mut members: Vec<usize>, matrix: &DissimilarityMatrix) -> Result<Self> {
        members.sort_unstable();
        let medoid = medoid(&members, matrix)?;
        let spread = cluster_spread(&members, medoid, matrix)?;
        Ok(Self {
            members,
            medoid,
            spread,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Assignment of trajectory indices to clusters.
///
/// Clusters are kept ordered by their smallest member, so two partitions
/// with the same groups compare equal no matter how they were produced.
/// A label of `None` marks a rejected trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct Partition {
    labels: Vec<Option<usize>>,
    clusters: Vec<Cluster>,
    k_nominal: usize,
    k_effective: usize,
    converged: bool,
}

#[derive(Deserialize)]
struct RawPartition {
    labels: Vec<Option<usize>>,
    clusters: Vec<Cluster>,
    k_nominal: usize,
    k_effective: usize,
    converged: bool,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        let p = Partition {
            labels: raw.labels,
            clusters: raw.clusters,
            k_nominal: raw.k_nominal,
            k_effective: raw.k_effective,
            converged: raw.converged,
        };
        p.check_structure()?;
        Ok(p)
    }
}

impl Partition {
    /// Builds a partition over `n` items from member groups. Empty groups are
    /// dropped; items absent from every group are rejected.
    pub fn from_groups(
        n: usize,
        groups: Vec<Vec<usize>>,
        matrix: &DissimilarityMatrix,
        k_nominal: usize,
    ) -> Result<Self> {
        let mut clusters = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|g| Cluster::from_members(g, matrix))
            .collect::<Result<Vec<_>>>()?;
        clusters.sort_by_key(|c| c.members[0]);
        let mut labels = vec![None; n];
        for (ci, c) in clusters.iter().enumerate() {
            for &m in &c.members {
                if m >= n {
                    return Err(Error::InvalidParameter(format!(
                        "member {m} out of range for {n} items"
                    )));
                }
                if labels[m].replace(ci).is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "item {m} assigned to more than one cluster"
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            k_effective: clusters.len(),
            clusters,
            k_nominal,
            converged: true,
        })
    }

    pub fn with_converged(mut self, converged: bool) -> Self {
        self.converged = converged;
        self
    }

    pub fn with_k_nominal(mut self, k_nominal: usize) -> Self {
        self.k_nominal = k_nominal;
        self
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k_nominal(&self) -> usize {
        self.k_nominal
    }

    pub fn k_effective(&self) -> usize {
        self.k_effective
    }

    /// False when an iterative clusterer hit its iteration cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn rejected(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn n_clustered(&self) -> usize {
        self.clusters.iter().map(Cluster::len).sum()
    }

    pub fn n_rejected(&self) -> usize {
        self.n() - self.n_clustered()
    }

    /// Keeps only clusters satisfying `keep`; members of dropped clusters become rejected.
    pub fn retain(&self, keep: impl Fn(&Cluster) -> bool) -> Partition {
        let clusters: Vec<Cluster> = self.clusters.iter().filter(|c| keep(c)).cloned().collect();
        let mut labels = vec![None; self.labels.len()];
        for (ci, c) in clusters.iter().enumerate() {
            for &m in &c.members {
                labels[m] = Some(ci);
            }
        }
        Partition {
            labels,
            k_effective: clusters.len(),
            clusters,
            k_nominal: self.k_nominal,
            converged: self.converged,
        }
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParameter(format!("invalid partition: {s}")));
        if self.k_effective != self.clusters.len() {
            return bad(format!(
                "k_effective {} but {} clusters",
                self.k_effective,
                self.clusters.len()
            ));
        }
        let mut seen = vec![None; self.labels.len()];
        for (ci, c) in self.clusters.iter().enumerate() {
            if c.members.is_empty() {
                return bad(format!("cluster {ci} is empty"));
            }
            if !c.members.contains(&c.medoid) {
                return bad(format!("medoid {} not in cluster {ci}", c.medoid));
            }
            if c.members.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("cluster {ci} members not strictly sorted"));
            }
            for &m in &c.members {
                match seen.get_mut(m) {
                    None => return bad(format!("member {m} out of range")),
                    Some(slot) if slot.is_some() => return bad(format!("member {m} repeated")),
                    Some(slot) => *slot = Some(ci),
                }
            }
        }
        if seen != self.labels {
            return bad("labels disagree with cluster membership".into());
        }
        Ok(())
    }

    /// Checks label/cluster consistency, medoids and spreads against `matrix`.
    pub fn validate(&self, matrix: &DissimilarityMatrix) -> Result<()> {
        self.check_structure()?;
        if self.labels.len() != matrix.len() {
            return Err(Error::InvalidParameter(format!(
                "partition covers {} items, matrix has {}",
                self.labels.len(),
                matrix.len()
            )));
        }
        for (ci, c) in self.clusters.iter().enumerate() {
            let expected = Cluster::from_members(c.members.clone(), matrix)?;
            if expected.medoid != c.medoid || expected.spread != c.spread {
                return Err(Error::InvalidParameter(format!("cluster {ci}: stale medoid/spread")));
            }
        }
        Ok(())
    }
}
