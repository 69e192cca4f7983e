//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error (including out-of-range parameters),
//! 2 data error, 3 computation error.
//! Failures print one line to stderr: `error[<kind>]: <message>`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::cluster::Bandwidth;
use crate::dtw::{dataset_hash, CacheStatus, MatrixCache};
use crate::error::{Error, Result};
use crate::io::output::{self, Manifest};
use crate::io::{self as dio, GroundTruth, LoadOptions, RecordingBundle, SyntheticSpec};
use crate::model::{normalize, NormalizationParams, Trajectory, UserClass};
use crate::pipeline::{sweep, Method, Selection, SweepConfig};
use crate::report::{render_report, ReportSpec};

#[derive(Debug, Parser)]
#[command(name = "trajclust", version, about = "Cluster road-user trajectories by maneuver")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Clustering method(s), comma separated: agglo, a1ms, a2ms, pam, dissim.
    #[arg(long, global = true, value_delimiter = ',', default_value = "a2ms")]
    pub method: Vec<Method>,
    #[arg(long, global = true, default_value_t = 5)]
    pub k_min: usize,
    #[arg(long, global = true, default_value_t = 15)]
    pub k_max: usize,
    /// Minimum fraction of medoid length kept by the projection for a merge.
    #[arg(long, global = true, default_value_t = 0.6)]
    pub min_trace: f64,
    /// Mean-shift bandwidth: `auto`, `auto:<quantile>` or a number.
    #[arg(long, global = true, default_value = "auto")]
    pub bandwidth: Bandwidth,
    /// Selection criterion: spread, db or silhouette.
    #[arg(long, global = true, default_value = "spread")]
    pub selection: Selection,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// inD / rounD recording directory.
    Ind,
    /// Generic CSV or JSON-lines file.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Intersection,
    SharedPath,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a dataset and write it as JSON lines.
    Ingest {
        #[arg(long, value_enum, default_value = "generic")]
        format: InputFormat,
        #[arg(long)]
        input: PathBuf,
        /// Recording range for the inD layout, e.g. `0-6`.
        #[arg(long, default_value = "0-0")]
        recordings: String,
        #[arg(long)]
        class: Option<UserClass>,
        #[arg(long, default_value_t = 1)]
        downsample: usize,
        #[arg(long, default_value = "scenario")]
        scenario: String,
    },
    /// Compute (or load from cache) the DTW dissimilarity matrix.
    Matrix {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Run one method at a single cluster count.
    Cluster {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        k: usize,
    },
    /// Sweep k for each method and keep the best partition per method.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Generate a synthetic scene with ground-truth labels.
    Synth {
        #[arg(long, value_enum, default_value = "intersection")]
        preset: Preset,
        #[arg(long, default_value_t = 30)]
        per_template: usize,
        #[arg(long, default_value_t = 0.02)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        outliers: usize,
        /// Start truncation range as `lo,hi` fractions of path length.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        truncate: Option<Vec<f64>>,
    },
    /// Render SVG figures and an HTML index for a saved partition.
    Report {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        partition: PathBuf,
        /// Plot normalized coordinates instead of the original ones.
        #[arg(long)]
        normalized: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Generic CSV or JSON-lines trajectory file.
    #[arg(long)]
    pub input: PathBuf,
    /// Keep only this user class.
    #[arg(long)]
    pub class: Option<UserClass>,
    /// Matrix cache directory (default `<out>/cache`).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let (code, kind) = match &e {
                Error::InvalidParameter(_) | Error::KOutOfRange { .. } => (1, "usage"),
                e if e.is_data_error() => (2, "data"),
                _ => (3, "compute"),
            };
            eprintln!("error[{kind}]: {}", e.to_string().replace('\n', " "));
            code
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    match cli.command {
        Command::Ingest {
            format,
            input,
            recordings,
            class,
            downsample,
            scenario,
        } => ingest(&g, format, &input, &recordings, class, downsample, &scenario),
        Command::Matrix { data } => matrix(&g, &data),
        Command::Cluster { data, k } => cluster(&g, &data, k),
        Command::Sweep { data } => sweep_cmd(&g, &data),
        Command::Synth {
            preset,
            per_template,
            sigma,
            outliers,
            truncate,
        } => synth(&g, preset, per_template, sigma, outliers, truncate),
        Command::Report {
            data,
            partition,
            normalized,
        } => report(&g, &data, &partition, normalized),
    }
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let bad = || Error::InvalidParameter(format!("recording range {s:?} is not `a-b`"));
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn ingest(
    g: &GlobalArgs,
    format: InputFormat,
    input: &Path,
    recordings: &str,
    class: Option<UserClass>,
    downsample: usize,
    scenario: &str,
) -> Result<()> {
    output::create_dir(&g.out)?;
    let (trajectories, stats) = match format {
        InputFormat::Ind => {
            let bundle = RecordingBundle::from_dir(input, scenario, parse_range(recordings)?)?;
            let opts = LoadOptions {
                user_class: class,
                downsample: downsample.max(1),
            };
            let out = dio::load_recordings(&bundle, &opts)?;
            let stats = json!({ "counts": out.counts, "skipped": out.diagnostics });
            (out.trajectories, stats)
        }
        InputFormat::Generic => {
            let ts: Vec<Trajectory> = dio::load_generic(input)?
                .into_iter()
                .filter(|t| class.is_none_or(|c| c == t.class()))
                .map(|t| t.downsample(downsample))
                .collect();
            (ts, json!({}))
        }
    };
    let data_path = g.out.join("trajectories.jsonl");
    dio::save_generic(&data_path, &trajectories)?;
    let stats_path = g.out.join("ingest_stats.json");
    output::write_json(&stats_path, &stats)?;

    let config = json!({
        "format": format!("{format:?}").to_lowercase(),
        "input": input,
        "recordings": recordings,
        "class": class,
        "downsample": downsample,
        "scenario": scenario,
    });
    let mut m = Manifest::new("ingest", config).with_dataset(&dataset_hash(&trajectories), trajectories.len());
    m.add_file(&g.out, &data_path)?;
    m.add_file(&g.out, &stats_path)?;
    m.write(&g.out)?;
    println!("{} trajectories -> {}", trajectories.len(), data_path.display());
    Ok(())
}

struct Prepared {
    raw: Vec<Trajectory>,
    normalized: Vec<Trajectory>,
    params: NormalizationParams,
    hash: [u8; 32],
}

fn prepare(data: &DataArgs) -> Result<Prepared> {
    let raw: Vec<Trajectory> = dio::load_generic(&data.input)?
        .into_iter()
        .filter(|t| data.class.is_none_or(|c| c == t.class()))
        .collect();
    let (normalized, params) = normalize(&raw)?;
    let hash = dataset_hash(&normalized);
    Ok(Prepared {
        raw,
        normalized,
        params,
        hash,
    })
}

fn cache_for(g: &GlobalArgs, data: &DataArgs) -> MatrixCache {
    MatrixCache::new(data.cache_dir.clone().unwrap_or_else(|| g.out.join("cache")))
}

fn matrix(g: &GlobalArgs, data: &DataArgs) -> Result<()> {
    let prep = prepare(data)?;
    let cache = cache_for(g, data);
    let (m, status) = cache.load_or_build(&prep.normalized, g.workers)?;
    output::create_dir(&g.out)?;
    let path = cache.path_for(&prep.hash);
    let config = json!({ "input": data.input, "class": data.class, "workers": g.workers });
    let mut manifest = Manifest::new("matrix", config)
        .with_dataset(&prep.hash, prep.raw.len())
        .with_normalization(prep.params);
    manifest.add_file(&g.out, &path)?;
    manifest.write(&g.out)?;
    let status = match status {
        CacheStatus::Hit => "cache hit",
        CacheStatus::Built => "computed",
    };
    println!("{}x{} matrix ({status}) -> {}", m.len(), m.len(), path.display());
    Ok(())
}

fn config_for(g: &GlobalArgs, method: Method, k_min: usize, k_max: usize) -> SweepConfig {
    SweepConfig {
        min_trace: g.min_trace,
        bandwidth: g.bandwidth,
        selection: g.selection,
        workers: g.workers,
        ..SweepConfig::new(method, k_min, k_max)
    }
}

fn cluster(g: &GlobalArgs, data: &DataArgs, k: usize) -> Result<()> {
    let method = g.method[0];
    let prep = prepare(data)?;
    let (m, _) = cache_for(g, data).load_or_build(&prep.normalized, g.workers)?;
    let cfg = config_for(g, method, k, k);
    let result = sweep(&prep.normalized, &m, &cfg)?;
    output::save_result(&g.out, &result, &prep.raw, &prep.hash, Some(prep.params))?;
    let r = result.best_report();
    println!(
        "{} k={k}: {} clusters, {} rejected, spread-on-cluster {:.4}",
        method.label(),
        r.k_effective,
        r.n_rejected,
        r.spread_on_cluster
    );
    Ok(())
}

fn sweep_cmd(g: &GlobalArgs, data: &DataArgs) -> Result<()> {
    let prep = prepare(data)?;
    let (m, _) = cache_for(g, data).load_or_build(&prep.normalized, g.workers)?;
    output::create_dir(&g.out)?;
    let mut results = Vec::new();
    let mut manifest = Manifest::new(
        "sweep",
        json!({
            "methods": g.method,
            "k_min": g.k_min,
            "k_max": g.k_max,
            "min_trace": g.min_trace,
            "bandwidth": g.bandwidth,
            "selection": g.selection,
            "workers": g.workers,
        }),
    )
    .with_dataset(&prep.hash, prep.raw.len())
    .with_normalization(prep.params);
    for &method in &g.method {
        let cfg = config_for(g, method, g.k_min, g.k_max);
        let result = sweep(&prep.normalized, &m, &cfg)?;
        let dir = g.out.join(method.as_str());
        let sub = output::save_result(&dir, &result, &prep.raw, &prep.hash, Some(prep.params))?;
        for f in sub.files {
            manifest.add_file(&g.out, &dir.join(&f.name))?;
        }
        manifest.add_file(&g.out, &dir.join(output::MANIFEST_FILE))?;
        println!(
            "{}: best k = {} ({} clusters)",
            method.label(),
            result.best_k,
            result.best().k_effective
        );
        results.push(result);
    }
    let summary = g.out.join(output::SUMMARY_FILE);
    output::write_summary(&summary, &results)?;
    manifest.add_file(&g.out, &summary)?;
    manifest.write(&g.out)?;
    Ok(())
}

fn synth(
    g: &GlobalArgs,
    preset: Preset,
    per_template: usize,
    sigma: f64,
    outliers: usize,
    truncate: Option<Vec<f64>>,
) -> Result<()> {
    let mut spec = match preset {
        Preset::Intersection => SyntheticSpec::intersection(per_template, sigma, outliers, g.seed),
        Preset::SharedPath => SyntheticSpec::shared_path(per_template, sigma, outliers, g.seed),
    };
    if let Some(t) = truncate {
        spec = spec.with_truncation(t[0], t[1]);
    }
    let ds = dio::generate(&spec)?;
    output::create_dir(&g.out)?;
    let data_path = g.out.join("synthetic.jsonl");
    dio::save_generic(&data_path, &ds.trajectories)?;
    let truth_path = g.out.join("ground_truth.csv");
    let mut wtr = csv::Writer::from_path(&truth_path).map_err(|e| Error::Cache {
        path: truth_path.clone(),
        reason: e.to_string(),
    })?;
    wtr.write_record(["trajectory_id", "label"])?;
    for (t, l) in ds.trajectories.iter().zip(&ds.labels) {
        let label = match l {
            GroundTruth::Template(i) => spec.templates[*i].name.clone(),
            GroundTruth::Outlier => "outlier".to_owned(),
        };
        wtr.write_record([t.id(), label.as_str()])?;
    }
    wtr.flush().map_err(|e| Error::io(&truth_path, e))?;

    let mut manifest = Manifest::new("synth", serde_json::to_value(&spec)?)
        .with_dataset(&dataset_hash(&ds.trajectories), ds.trajectories.len());
    manifest.add_file(&g.out, &data_path)?;
    manifest.add_file(&g.out, &truth_path)?;
    manifest.write(&g.out)?;
    println!("{} trajectories -> {}", ds.trajectories.len(), data_path.display());
    Ok(())
}

fn report(g: &GlobalArgs, data: &DataArgs, partition: &Path, normalized: bool) -> Result<()> {
    let prep = prepare(data)?;
    let file = dio::load_partition(partition)?;
    let ids: Vec<&str> = prep.raw.iter().map(|t| t.id()).collect();
    if ids != file.trajectory_ids.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter(format!(
            "{} does not match the trajectories in {}",
            partition.display(),
            data.input.display()
        )));
    }
    let dir = g.out.join("report");
    let spec = ReportSpec {
        denormalize: !normalized,
        ..ReportSpec::new(&dir)
    };
    let files = render_report(&file.partition, &prep.normalized, Some(&prep.params), &spec)?;
    let mut manifest = Manifest::new(
        "report",
        json!({ "input": data.input, "partition": partition, "normalized": normalized }),
    )
    .with_dataset(&prep.hash, prep.raw.len())
    .with_normalization(prep.params);
    for f in &files {
        manifest.add_file(&g.out, f)?;
    }
    manifest.write(&g.out)?;
    println!("{} files -> {}", files.len(), dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("0-6").unwrap(), 0..=6);
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert!(parse_range("6-0").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn usage_error_exit_code() {
        assert_eq!(cli_main(["trajclust", "frobnicate"]), 1);
        assert_eq!(
            cli_main(["trajclust", "sweep", "--input", "x.csv", "--method", "kmeans"]),
            1
        );
        assert_eq!(cli_main(["trajclust", "--help"]), 0);
    }

    #[test]
    fn missing_input_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let code = cli_main([
            "trajclust",
            "matrix",
            "--input",
            dir.path().join("nope.csv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }
}
