//! Split-then-merge refinement of a base partition.
//!
//! Each cluster is first split by mean-shift over the start and end points of
//! its members. Sub-clusters are then merged back when one medoid, trimmed to
//! the span covered by the other medoid, lies within the sum of both spreads
//! and keeps at least `min_trace` of its arc length.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{mean_shift, Bandwidth, Cluster, Partition};
use crate::dtw::{dtw_points, DissimilarityMatrix};
use crate::error::{Error, Result};
use crate::model::{endpoints, Point2, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineMode {
    /// No refinement.
    None,
    /// One mean-shift over the joint 4-D (start, end) vectors.
    A1ms,
    /// Separate mean-shifts over start points and end points.
    A2ms,
}

impl fmt::Display for RefineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefineMode::None => "none",
            RefineMode::A1ms => "a1ms",
            RefineMode::A2ms => "a2ms",
        })
    }
}

impl FromStr for RefineMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(RefineMode::None),
            "a1ms" => Ok(RefineMode::A1ms),
            "a2ms" => Ok(RefineMode::A2ms),
            other => Err(format!("unknown refine mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub mode: RefineMode,
    pub min_trace: f64,
    pub bandwidth: Bandwidth,
}

impl RefineConfig {
    pub fn new(mode: RefineMode, min_trace: f64, bandwidth: Bandwidth) -> Result<Self> {
        if !(min_trace > 0.0 && min_trace <= 1.0) {
            return Err(Error::InvalidParameter(format!("min_trace {min_trace} outside (0, 1]")));
        }
        Ok(Self {
            mode,
            min_trace,
            bandwidth,
        })
    }
}

/// Splits every cluster by the mean-shift modes of its members' endpoints.
/// Members never leave their parent cluster.
pub fn split_clusters(
    partition: &Partition,
    dataset: &[Trajectory],
    matrix: &DissimilarityMatrix,
    mode: RefineMode,
    bandwidth: Bandwidth,
) -> Result<Partition> {
    if mode == RefineMode::None {
        return Err(Error::InvalidParameter("split_clusters needs A1MS or A2MS".into()));
    }
    let mut groups = Vec::new();
    for cluster in partition.clusters() {
        if cluster.len() == 1 {
            groups.push(cluster.members.clone());
            continue;
        }
        let ends: Vec<_> = cluster.members.iter().map(|&i| endpoints(&dataset[i])).collect();
        let keys: Vec<(usize, usize)> = match mode {
            RefineMode::A2ms => {
                let starts: Vec<[f64; 2]> = ends.iter().map(|e| [e.start.x, e.start.y]).collect();
                let finals: Vec<[f64; 2]> = ends.iter().map(|e| [e.end.x, e.end.y]).collect();
                let s = mean_shift(&starts, bandwidth)?;
                let f = mean_shift(&finals, bandwidth)?;
                s.assignments.into_iter().zip(f.assignments).collect()
            }
            RefineMode::A1ms => {
                let joint: Vec<[f64; 4]> = ends.iter().map(|e| e.to_array()).collect();
                let r = mean_shift(&joint, bandwidth)?;
                r.assignments.into_iter().map(|m| (m, 0)).collect()
            }
            RefineMode::None => unreachable!(),
        };
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut sub: Vec<Vec<usize>> = Vec::new();
        for (&member, key) in cluster.members.iter().zip(keys) {
            match order.iter().position(|k| *k == key) {
                Some(pos) => sub[pos].push(member),
                None => {
                    order.push(key);
                    sub.push(vec![member]);
                }
            }
        }
        groups.extend(sub);
    }
    Ok(
        Partition::from_groups(partition.n(), groups, matrix, partition.k_nominal())?
            .with_converged(partition.converged()),
    )
}

/// A cut point on segment `segment` (between vertices `segment` and
/// `segment + 1`) at parameter `lambda ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub segment: usize,
    pub lambda: f64,
}

impl Cut {
    fn position(self) -> f64 {
        self.segment as f64 + self.lambda
    }

    fn point(self, path: &[Point2]) -> Point2 {
        let a = path[self.segment];
        let b = path[self.segment + 1];
        if self.lambda == 0.0 {
            a
        } else if self.lambda == 1.0 {
            b
        } else {
            Point2::new(a.x + self.lambda * (b.x - a.x), a.y + self.lambda * (b.y - a.y))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Contiguous piece of the projected-onto path; empty when the cuts cross.
    pub trimmed: Vec<Point2>,
    pub start_cut: Option<Cut>,
    pub end_cut: Option<Cut>,
    /// Arc length of `trimmed` over arc length of the original path.
    pub trace_fraction: f64,
}

/// Foot parameter of `p` on segment `a → b`; `None` for zero-length segments.
fn segment_lambda(p: Point2, a: Point2, b: Point2) -> Option<f64> {
    let (sx, sy) = (b.x - a.x, b.y - a.y);
    let len2 = sx * sx + sy * sy;
    if len2 == 0.0 {
        return None;
    }
    Some(((p.x - a.x) * sx + (p.y - a.y) * sy) / len2)
}

fn find_cut(path: &[Point2], p: Point2, mut segments: impl Iterator<Item = usize>) -> Option<Cut> {
    segments.find_map(|j| {
        segment_lambda(p, path[j], path[j + 1])
            .filter(|l| (0.0..=1.0).contains(l))
            .map(|lambda| Cut { segment: j, lambda })
    })
}

fn arc_length(path: &[Point2]) -> f64 {
    path.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Trims `onto` to the stretch between the perpendicular feet of
/// `reference`'s first and last points.
///
/// The start foot is searched from the first segment forward, the end foot
/// from the last segment backward; the first segment whose foot parameter
/// lies in `[0, 1]` wins. A side with no foot is left untrimmed.
pub fn project(onto: &[Point2], reference: &[Point2]) -> Result<ProjectionResult> {
    if onto.len() < 2 || reference.len() < 2 {
        return Err(Error::InvalidParameter("projection needs paths of length ≥ 2".into()));
    }
    let nseg = onto.len() - 1;
    let start_cut = find_cut(onto, reference[0], 0..nseg);
    let end_cut = find_cut(onto, reference[reference.len() - 1], (0..nseg).rev());
    let s = start_cut.unwrap_or(Cut {
        segment: 0,
        lambda: 0.0,
    });
    let e = end_cut.unwrap_or(Cut {
        segment: nseg - 1,
        lambda: 1.0,
    });
    let total = arc_length(onto);

    if s.position() > e.position() {
        return Ok(ProjectionResult {
            trimmed: Vec::new(),
            start_cut,
            end_cut,
            trace_fraction: 0.0,
        });
    }

    let mut trimmed = Vec::with_capacity(e.segment - s.segment + 2);
    let first = s.point(onto);
    trimmed.push(first);
    for (offset, &v) in onto[s.segment + 1..=e.segment].iter().enumerate() {
        if offset == 0 && start_cut.is_some() && v == first {
            continue;
        }
        trimmed.push(v);
    }
    let last = e.point(onto);
    if !(end_cut.is_some() && trimmed.len() > 1 && *trimmed.last().unwrap() == last) {
        trimmed.push(last);
    }

    let trace_fraction = if total > 0.0 {
        (arc_length(&trimmed) / total).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ProjectionResult {
        trimmed,
        start_cut,
        end_cut,
        trace_fraction,
    })
}

#[derive(Debug, Clone, Copy)]
struct PairEval {
    distance: f64,
    trace: f64,
}

fn evaluate_pair(candidate: &[Point2], target: &[Point2]) -> Result<Option<PairEval>> {
    let proj = project(candidate, target)?;
    if proj.trimmed.is_empty() {
        return Ok(None);
    }
    Ok(Some(PairEval {
        distance: dtw_points(target, &proj.trimmed)?,
        trace: proj.trace_fraction,
    }))
}

/// Merges sub-clusters until no ordered pair `(i, j)` satisfies
/// `dtw(medoid_j, trim(medoid_i by medoid_j)) ≤ spread_i + spread_j` with a
/// trace fraction of at least `min_trace`.
///
/// The smaller cluster is absorbed into the larger (lower index on equal
/// size); the scan restarts after every merge.
pub fn merge_clusters(
    partition: &Partition,
    matrix: &DissimilarityMatrix,
    dataset: &[Trajectory],
    min_trace: f64,
) -> Result<Partition> {
    if !(min_trace > 0.0 && min_trace <= 1.0) {
        return Err(Error::InvalidParameter(format!("min_trace {min_trace} outside (0, 1]")));
    }
    let mut current = partition.clone();
    let mut cache: HashMap<(usize, usize), Option<PairEval>> = HashMap::new();
    let mut paths: HashMap<usize, Vec<Point2>> = HashMap::new();

    loop {
        let clusters: &[Cluster] = current.clusters();
        for c in clusters {
            paths.entry(c.medoid).or_insert_with(|| dataset[c.medoid].positions());
        }
        let pending: Vec<(usize, usize)> = clusters
            .iter()
            .flat_map(|ci| clusters.iter().map(move |cj| (ci.medoid, cj.medoid)))
            .filter(|&(a, b)| a != b && !cache.contains_key(&(a, b)))
            .collect();
        let evaluated: Vec<((usize, usize), Option<PairEval>)> = pending
            .into_par_iter()
            .map(|(a, b)| evaluate_pair(&paths[&a], &paths[&b]).map(|r| ((a, b), r)))
            .collect::<Result<_>>()?;
        cache.extend(evaluated);

        let mut hit = None;
        'scan: for (i, ci) in clusters.iter().enumerate() {
            for (j, cj) in clusters.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some(eval) = cache[&(ci.medoid, cj.medoid)] {
                    if eval.distance <= ci.spread + cj.spread && eval.trace >= min_trace {
                        hit = Some((i, j));
                        break 'scan;
                    }
                }
            }
        }
        let Some((i, j)) = hit else {
            return Ok(current);
        };

        let (absorber, absorbed) = match clusters[i].len().cmp(&clusters[j].len()) {
            std::cmp::Ordering::Greater => (i, j),
            std::cmp::Ordering::Less => (j, i),
            std::cmp::Ordering::Equal => (i.min(j), i.max(j)),
        };
        log::trace!("merging cluster {absorbed} into {absorber}");
        let mut groups = current.groups();
        let moved = std::mem::take(&mut groups[absorbed]);
        groups[absorber].extend(moved);
        current = Partition::from_groups(current.n(), groups, matrix, current.k_nominal())?
            .with_converged(current.converged());
    }
}

/// Drops single-member clusters; returns the pruned partition and the newly
/// rejected indices.
pub fn discard_singletons(partition: &Partition) -> (Partition, Vec<usize>) {
    let rejected = partition
        .clusters()
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c.members[0])
        .collect();
    (partition.retain(|c| c.len() >= 2), rejected)
}
