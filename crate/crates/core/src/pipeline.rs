//! Cluster-count sweep: base clustering, optional endpoint refinement,
//! singleton rejection and scoring for every `k` in a range, then selection
//! of the best partition.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{agglomerative, dissim_row_clustering, pam, Bandwidth, Partition};
use crate::dtw::{CacheStatus, DissimilarityMatrix, MatrixCache};
use crate::error::{Error, Result};
use crate::metrics::ValidityReport;
use crate::model::Trajectory;
use crate::parallel::with_workers;
use crate::refine::{discard_singletons, merge_clusters, split_clusters, RefineMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Agglo,
    A1ms,
    A2ms,
    Pam,
    Dissim,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Agglo, Method::A1ms, Method::A2ms, Method::Pam, Method::Dissim];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Agglo => "agglo",
            Method::A1ms => "a1ms",
            Method::A2ms => "a2ms",
            Method::Pam => "pam",
            Method::Dissim => "dissim",
        }
    }

    /// Name used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Agglo => "Agglo",
            Method::A1ms => "A1MS",
            Method::A2ms => "A2MS",
            Method::Pam => "PAM",
            Method::Dissim => "Dissi.",
        }
    }

    fn refine_mode(self) -> Option<RefineMode> {
        match self {
            Method::A1ms => Some(RefineMode::A1ms),
            Method::A2ms => Some(RefineMode::A2ms),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown method {s:?} (expected agglo, a1ms, a2ms, pam or dissim)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    SpreadOnCluster,
    DbModified,
    Silhouette,
}

impl Selection {
    fn score(self, r: &ValidityReport) -> f64 {
        match self {
            Selection::SpreadOnCluster => r.spread_on_cluster,
            Selection::DbModified => r.db_modified,
            Selection::Silhouette => r.silhouette,
        }
    }

    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Selection::Silhouette => candidate > incumbent,
            _ => candidate < incumbent,
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::SpreadOnCluster => "spread",
            Selection::DbModified => "db",
            Selection::Silhouette => "silhouette",
        })
    }
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "spread" | "spread_on_cluster" => Ok(Selection::SpreadOnCluster),
            "db" | "db_modified" => Ok(Selection::DbModified),
            "silhouette" | "slh" => Ok(Selection::Silhouette),
            other => Err(format!("unknown selection criterion {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub method: Method,
    pub k_min: usize,
    pub k_max: usize,
    pub min_trace: f64,
    pub bandwidth: Bandwidth,
    pub selection: Selection,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl SweepConfig {
    pub fn new(method: Method, k_min: usize, k_max: usize) -> Self {
        Self {
            method,
            k_min,
            k_max,
            min_trace: 0.6,
            bandwidth: Bandwidth::default(),
            selection: Selection::default(),
            workers: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k_min < 2 || self.k_min > self.k_max || self.k_max > n {
            return Err(Error::InvalidParameter(format!(
                "need 2 ≤ k_min ≤ k_max ≤ n, got k_min = {}, k_max = {}, n = {n}",
                self.k_min, self.k_max
            )));
        }
        if !(self.min_trace > 0.0 && self.min_trace <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "min_trace {} outside (0, 1]",
                self.min_trace
            )));
        }
        Ok(())
    }
}

/// Outcome of one clustering run at a fixed nominal `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Final partition after singleton rejection.
    pub partition: Partition,
    /// `None` when fewer than two clusters survive (unscoreable).
    pub report: Option<ValidityReport>,
}

/// Runs one method at nominal cluster count `k` and scores the result.
pub fn run_once(
    dataset: &[Trajectory],
    matrix: &DissimilarityMatrix,
    method: Method,
    k: usize,
    min_trace: f64,
    bandwidth: Bandwidth,
) -> Result<RunOutcome> {
    if dataset.len() != matrix.len() {
        return Err(Error::InvalidParameter(format!(
            "dataset has {} trajectories, matrix covers {}",
            dataset.len(),
            matrix.len()
        )));
    }
    let base = match method {
        Method::Agglo | Method::A1ms | Method::A2ms => agglomerative(matrix, k)?,
        Method::Pam => pam(matrix, k)?,
        Method::Dissim => dissim_row_clustering(matrix, k)?,
    };
    let refined = match method.refine_mode() {
        Some(mode) => {
            let split = split_clusters(&base, dataset, matrix, mode, bandwidth)?;
            merge_clusters(&split, matrix, dataset, min_trace)?
        }
        None => base,
    };
    let (partition, _) = discard_singletons(&refined);
    let report = if partition.k_effective() >= 2 {
        Some(ValidityReport::compute(&partition, matrix)?)
    } else {
        None
    };
    Ok(RunOutcome { partition, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KEvaluation {
    pub k_nominal: usize,
    pub k_effective: usize,
    pub partition: Partition,
    pub report: Option<ValidityReport>,
    pub wall_time: Duration,
}

impl KEvaluation {
    pub fn is_scoreable(&self) -> bool {
        self.report.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    /// One entry per `k`, ascending.
    pub per_k: Vec<KEvaluation>,
    pub best_k: usize,
    best_index: usize,
}

impl SweepResult {
    pub fn best(&self) -> &KEvaluation {
        &self.per_k[self.best_index]
    }

    pub fn best_partition(&self) -> &Partition {
        &self.best().partition
    }

    pub fn best_report(&self) -> &ValidityReport {
        self.best().report.as_ref().expect("best entry is scoreable")
    }
}

/// Sweeps `k` over `[k_min, k_max]` against a precomputed matrix.
///
/// Evaluations run in parallel and are ordered by `k` afterwards. The best
/// entry minimizes spread-on-cluster or modified DB, or maximizes
/// silhouette; ties keep the smaller `k`.
pub fn sweep(dataset: &[Trajectory], matrix: &DissimilarityMatrix, config: &SweepConfig) -> Result<SweepResult> {
    config.validate(dataset.len())?;
    let per_k: Vec<KEvaluation> = with_workers(config.workers, || {
        (config.k_min..=config.k_max)
            .into_par_iter()
            .map(|k| {
                let start = Instant::now();
                let out = run_once(dataset, matrix, config.method, k, config.min_trace, config.bandwidth)?;
                Ok(KEvaluation {
                    k_nominal: k,
                    k_effective: out.partition.k_effective(),
                    partition: out.partition,
                    report: out.report,
                    wall_time: start.elapsed(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut best: Option<(usize, f64)> = None;
    for (idx, eval) in per_k.iter().enumerate() {
        let Some(report) = &eval.report else { continue };
        let score = config.selection.score(report);
        if best.is_none_or(|(_, b)| config.selection.better(score, b)) {
            best = Some((idx, score));
        }
    }
    let Some((best_index, _)) = best else {
        return Err(Error::AllUnscoreable {
            k_min: config.k_min,
            k_max: config.k_max,
        });
    };
    Ok(SweepResult {
        config: *config,
        best_k: per_k[best_index].k_nominal,
        per_k,
        best_index,
    })
}

/// [`sweep`] with the matrix loaded from, or stored into, `cache`.
pub fn sweep_cached(
    dataset: &[Trajectory],
    config: &SweepConfig,
    cache: &MatrixCache,
) -> Result<(SweepResult, DissimilarityMatrix, CacheStatus)> {
    let (matrix, status) = cache.load_or_build(dataset, config.workers)?;
    let result = sweep(dataset, &matrix, config)?;
    Ok((result, matrix, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::build_matrix;
    use crate::model::{Point2, UserClass};

    fn line(id: usize, y: f64, n: usize) -> Trajectory {
        Trajectory::from_positions(
            format!("t{id:02}"),
            UserClass::Other,
            (0..n).map(|i| Point2::new(i as f64 / (n - 1) as f64, y)),
        )
        .unwrap()
    }

    fn three_groups() -> Vec<Trajectory> {
        let mut ds = Vec::new();
        for (g, y) in [0.1, 0.5, 0.9].into_iter().enumerate() {
            for i in 0..4 {
                ds.push(line(g * 4 + i, y + 0.002 * i as f64, 12));
            }
        }
        ds
    }

    #[test]
    fn agglo_k_equals_n_unscoreable() {
        let ds = three_groups();
        let m = build_matrix(&ds).unwrap();
        let out = run_once(&ds, &m, Method::Agglo, ds.len(), 0.6, Bandwidth::default()).unwrap();
        assert_eq!(out.partition.k_effective(), 0);
        assert_eq!(out.partition.n_rejected(), ds.len());
        assert!(out.report.is_none());
    }

    #[test]
    fn pam_three_groups() {
        let ds = three_groups();
        let m = build_matrix(&ds).unwrap();
        let out = run_once(&ds, &m, Method::Pam, 3, 0.6, Bandwidth::default()).unwrap();
        assert_eq!(out.partition.k_effective(), 3);
        assert!(out.report.unwrap().silhouette > 0.9);
    }

    #[test]
    fn single_k_sweep() {
        let ds = three_groups();
        let m = build_matrix(&ds).unwrap();
        let cfg = SweepConfig::new(Method::Agglo, 3, 3);
        let r = sweep(&ds, &m, &cfg).unwrap();
        assert_eq!(r.per_k.len(), 1);
        assert_eq!(r.best_k, 3);
        assert_eq!(r.best_report().k_effective, 3);
    }

    #[test]
    fn sweep_rejects_bad_config() {
        let ds = three_groups();
        let m = build_matrix(&ds).unwrap();
        assert!(sweep(&ds, &m, &SweepConfig::new(Method::Agglo, 1, 3)).is_err());
        assert!(sweep(&ds, &m, &SweepConfig::new(Method::Agglo, 5, 3)).is_err());
        assert!(sweep(&ds, &m, &SweepConfig::new(Method::Agglo, 2, 13)).is_err());
    }

    #[test]
    fn all_unscoreable_is_an_error() {
        let ds: Vec<Trajectory> = (0..3).map(|i| line(i, 0.3 * i as f64, 5)).collect();
        let m = build_matrix(&ds).unwrap();
        let err = sweep(&ds, &m, &SweepConfig::new(Method::Agglo, 2, 3)).unwrap_err();
        assert!(matches!(err, Error::AllUnscoreable { .. }));
    }

    #[test]
    fn parse_method_and_selection() {
        assert_eq!("A2MS".parse::<Method>().unwrap(), Method::A2ms);
        assert!("kmeans".parse::<Method>().is_err());
        assert_eq!("spread".parse::<Selection>().unwrap(), Selection::SpreadOnCluster);
    }
}
