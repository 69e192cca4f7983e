//! Result artifacts: per-trajectory labels, per-`k` metrics table, the best
//! partition as JSON, and a manifest with checksums of everything written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::metrics::ValidityReport;
use crate::model::{NormalizationParams, Trajectory};
use crate::pipeline::{KEvaluation, Method, SweepResult};

pub const LABELS_FILE: &str = "labels.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PARTITION_FILE: &str = "partition.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Serialized form of a partition together with the trajectory ids it refers
/// to, so a report can be rendered later from the dataset file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub method: Method,
    pub trajectory_ids: Vec<String>,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub dataset_hash: Option<String>,
    pub n_trajectories: Option<usize>,
    pub normalization: Option<NormalizationParams>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.into(),
            config,
            dataset_hash: None,
            n_trajectories: None,
            normalization: None,
            files: Vec::new(),
        }
    }

    pub fn with_dataset(mut self, hash: &[u8; 32], n: usize) -> Self {
        self.dataset_hash = Some(hex::encode(hash));
        self.n_trajectories = Some(n);
        self
    }

    pub fn with_normalization(mut self, params: NormalizationParams) -> Self {
        self.normalization = Some(params);
        self
    }

    /// Records `path` (relative to `root`) with its size and SHA-256.
    pub fn add_file(&mut self, root: &Path, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .strip_prefix(root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        self.files.push(FileEntry {
            name,
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        write_json(&path, self)?;
        Ok(path)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `trajectory_id,cluster_id` rows; rejected items get `REJECTED`.
pub fn write_labels(path: &Path, partition: &Partition, dataset: &[Trajectory]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    wtr.write_record(["trajectory_id", "cluster_id"])?;
    for (t, label) in dataset.iter().zip(partition.labels()) {
        let label = label.map_or_else(|| "REJECTED".to_owned(), |c| c.to_string());
        wtr.write_record([t.id(), label.as_str()])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Cache {
            path: path.to_owned(),
            reason: format!("{other:?}"),
        },
    }
}

fn fmt_score(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| format!("{x:.4}"))
}

const METRICS_HEADER: [&str; 10] = [
    "Method",
    "n_k",
    "Time",
    "DB",
    "DB orig.",
    "Slh.",
    "Spr.",
    "Best n_k",
    "Nb trajs.",
    "Selected",
];

fn metrics_row(method: Method, eval: &KEvaluation, selected: bool) -> Vec<String> {
    let r: Option<&ValidityReport> = eval.report.as_ref();
    let n = eval.partition.n();
    let kept = eval.partition.n_clustered();
    let pct = if n == 0 { 0.0 } else { 100.0 * kept as f64 / n as f64 };
    vec![
        method.label().to_owned(),
        eval.k_nominal.to_string(),
        format!("{:.3}", eval.wall_time.as_secs_f64()),
        fmt_score(r.map(|r| r.db_modified)),
        fmt_score(r.map(|r| r.db_original)),
        fmt_score(r.map(|r| r.silhouette)),
        fmt_score(r.map(|r| r.spread_on_cluster)),
        format!("{} ({})", eval.k_nominal, eval.k_effective),
        format!("{pct:.1}% ({})", eval.partition.n_rejected()),
        if selected { "yes" } else { "no" }.to_owned(),
    ]
}

/// One row per evaluated `k`.
pub fn write_metrics(path: &Path, result: &SweepResult) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    wtr.write_record(METRICS_HEADER)?;
    for eval in &result.per_k {
        wtr.write_record(metrics_row(result.config.method, eval, eval.k_nominal == result.best_k))?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

/// One row per method: its selected `k`.
pub fn write_summary(path: &Path, results: &[SweepResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    wtr.write_record(&METRICS_HEADER[..9])?;
    for r in results {
        let mut row = metrics_row(r.config.method, r.best(), true);
        row.pop();
        wtr.write_record(row)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

pub fn write_partition(path: &Path, method: Method, partition: &Partition, dataset: &[Trajectory]) -> Result<()> {
    write_json(
        path,
        &PartitionFile {
            method,
            trajectory_ids: dataset.iter().map(|t| t.id().to_owned()).collect(),
            partition: partition.clone(),
        },
    )
}

pub fn load_partition(path: &Path) -> Result<PartitionFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: PartitionFile = serde_json::from_str(&text)?;
    if file.trajectory_ids.len() != file.partition.n() {
        return Err(Error::InvalidParameter(format!(
            "{}: {} ids for a partition of {} items",
            path.display(),
            file.trajectory_ids.len(),
            file.partition.n()
        )));
    }
    Ok(file)
}

/// Writes labels, metrics, partition and manifest for one sweep into `dir`.
/// Returns the manifest.
pub fn save_result(
    dir: &Path,
    result: &SweepResult,
    dataset: &[Trajectory],
    dataset_hash: &[u8; 32],
    normalization: Option<NormalizationParams>,
) -> Result<Manifest> {
    create_dir(dir)?;
    let labels = dir.join(LABELS_FILE);
    let metrics = dir.join(METRICS_FILE);
    let partition = dir.join(PARTITION_FILE);
    write_labels(&labels, result.best_partition(), dataset)?;
    write_metrics(&metrics, result)?;
    write_partition(&partition, result.config.method, result.best_partition(), dataset)?;

    let config = serde_json::json!({
        "sweep": result.config,
        "best_k": result.best_k,
    });
    let mut manifest = Manifest::new("sweep", config).with_dataset(dataset_hash, dataset.len());
    if let Some(p) = normalization {
        manifest = manifest.with_normalization(p);
    }
    for f in [&labels, &metrics, &partition] {
        manifest.add_file(dir, f)?;
    }
    manifest.write(dir)?;
    Ok(manifest)
}
