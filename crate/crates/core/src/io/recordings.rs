//! Loader for drone recordings in the inD / rounD CSV layout.
//!
//! Each recording `NN` ships `NN_tracks.csv` (one row per track and frame,
//! keyed by `recordingId`, `trackId`, `frame` with `xCenter` / `yCenter`),
//! `NN_tracksMeta.csv` (one row per track with its `class`) and
//! `NN_recordingMeta.csv`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{TrajPoint, Trajectory, UserClass};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingFiles {
    pub recording_id: u32,
    pub tracks: PathBuf,
    pub tracks_meta: PathBuf,
    pub recording_meta: Option<PathBuf>,
}

/// The recordings making up one scenario, e.g. files 00 to 06.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingBundle {
    pub scenario_id: String,
    pub recordings: Vec<RecordingFiles>,
}

impl RecordingBundle {
    /// Resolves `NN_tracks.csv`, `NN_tracksMeta.csv` and (if present)
    /// `NN_recordingMeta.csv` for every id in `range` under `dir`.
    pub fn from_dir(dir: &Path, scenario_id: impl Into<String>, range: RangeInclusive<u32>) -> Result<Self> {
        let mut recordings = Vec::new();
        for id in range {
            let tracks = dir.join(format!("{id:02}_tracks.csv"));
            let tracks_meta = dir.join(format!("{id:02}_tracksMeta.csv"));
            let recording_meta = dir.join(format!("{id:02}_recordingMeta.csv"));
            for p in [&tracks, &tracks_meta] {
                if !p.is_file() {
                    return Err(Error::io(
                        p,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "recording file not found"),
                    ));
                }
            }
            recordings.push(RecordingFiles {
                recording_id: id,
                tracks,
                tracks_meta,
                recording_meta: recording_meta.is_file().then_some(recording_meta),
            });
        }
        Ok(Self {
            scenario_id: scenario_id.into(),
            recordings,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Keep only tracks of this class; `None` keeps every known class.
    pub user_class: Option<UserClass>,
    /// Keep every `downsample`-th frame (1 keeps all).
    pub downsample: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            user_class: None,
            downsample: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackDiagnostic {
    pub recording_id: u32,
    pub track_id: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassCounts {
    pub car: usize,
    pub pedestrian: usize,
    pub bicycle: usize,
    pub other: usize,
}

impl ClassCounts {
    fn add(&mut self, c: UserClass) {
        match c {
            UserClass::Car => self.car += 1,
            UserClass::Pedestrian => self.pedestrian += 1,
            UserClass::Bicycle => self.bicycle += 1,
            UserClass::Other => self.other += 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOutcome {
    pub trajectories: Vec<Trajectory>,
    /// Tracks that were skipped, with the reason.
    pub diagnostics: Vec<TrackDiagnostic>,
    /// Per-class counts of every valid track before class filtering.
    pub counts: ClassCounts,
}

/// Maps a published class label; `None` for labels outside the schema.
pub fn map_class(label: &str) -> Option<UserClass> {
    match label.trim() {
        "car" => Some(UserClass::Car),
        "pedestrian" => Some(UserClass::Pedestrian),
        "bicycle" => Some(UserClass::Bicycle),
        "truck_bus" | "truck" | "bus" | "van" | "trailer" | "motorcycle" => Some(UserClass::Other),
        _ => None,
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn {
            path: path.to_owned(),
            column: name.to_owned(),
        })
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, path: &Path) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| Error::Parse {
        path: path.to_owned(),
        line,
        reason: format!("cannot parse {raw:?}"),
    })
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse {
                path: path.to_owned(),
                line: 0,
                reason: format!("{other:?}"),
            },
        })
}

fn read_meta(path: &Path) -> Result<BTreeMap<u64, String>> {
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    let track = column(&headers, "trackId", path)?;
    let class = column(&headers, "class", path)?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.insert(parse_field(&rec, track, path)?, rec.get(class).unwrap_or("").to_owned());
    }
    Ok(out)
}

fn read_frame_rate(path: &Path) -> Result<Option<f64>> {
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    let Ok(idx) = column(&headers, "frameRate", path) else {
        return Ok(None);
    };
    match rdr.records().next() {
        Some(rec) => Ok(Some(parse_field(&rec?, idx, path)?)),
        None => Ok(None),
    }
}

fn load_recording(files: &RecordingFiles, opts: &LoadOptions) -> Result<LoadOutcome> {
    let meta = read_meta(&files.tracks_meta)?;
    if let Some(rm) = &files.recording_meta {
        if let Some(rate) = read_frame_rate(rm)? {
            log::debug!("recording {:02}: {rate} Hz", files.recording_id);
        }
    }

    let path = files.tracks.as_path();
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    let rec_col = column(&headers, "recordingId", path)?;
    let track_col = column(&headers, "trackId", path)?;
    let frame_col = column(&headers, "frame", path)?;
    let x_col = column(&headers, "xCenter", path)?;
    let y_col = column(&headers, "yCenter", path)?;

    let mut rows: BTreeMap<u64, Vec<TrajPoint>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let rid: u32 = parse_field(&rec, rec_col, path)?;
        if rid != files.recording_id {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: rec.position().map_or(0, |p| p.line()),
                reason: format!("recordingId {rid} in file for recording {}", files.recording_id),
            });
        }
        let track: u64 = parse_field(&rec, track_col, path)?;
        rows.entry(track).or_default().push(TrajPoint::new(
            parse_field(&rec, x_col, path)?,
            parse_field(&rec, y_col, path)?,
            parse_field(&rec, frame_col, path)?,
        ));
    }

    let mut out = LoadOutcome::default();
    let skip = |out: &mut LoadOutcome, track_id: u64, reason: String| {
        out.diagnostics.push(TrackDiagnostic {
            recording_id: files.recording_id,
            track_id,
            reason,
        });
    };
    for (track_id, mut points) in rows {
        let Some(label) = meta.get(&track_id) else {
            skip(&mut out, track_id, "track missing from tracksMeta".into());
            continue;
        };
        let Some(class) = map_class(label) else {
            skip(&mut out, track_id, format!("unknown class label {label:?}"));
            continue;
        };
        points.sort_by_key(|p| p.frame);
        let id = format!("{:02}-{track_id}", files.recording_id);
        let traj = match Trajectory::new(id, class, points) {
            Ok(t) => t.downsample(opts.downsample),
            Err(e) => {
                skip(&mut out, track_id, e.to_string());
                continue;
            }
        };
        out.counts.add(class);
        if opts.user_class.is_none_or(|c| c == class) {
            out.trajectories.push(traj);
        }
    }
    Ok(out)
}

/// Loads every recording of a bundle, files in parallel, tracks ordered by
/// recording then track id.
pub fn load_recordings(bundle: &RecordingBundle, opts: &LoadOptions) -> Result<LoadOutcome> {
    let parts: Vec<LoadOutcome> = bundle
        .recordings
        .par_iter()
        .map(|f| load_recording(f, opts))
        .collect::<Result<_>>()?;
    let mut all = LoadOutcome::default();
    for p in parts {
        all.trajectories.extend(p.trajectories);
        all.diagnostics.extend(p.diagnostics);
        all.counts.car += p.counts.car;
        all.counts.pedestrian += p.counts.pedestrian;
        all.counts.bicycle += p.counts.bicycle;
        all.counts.other += p.counts.other;
    }
    log::info!(
        "scenario {}: {} cars, {} pedestrians, {} cyclists, {} other; {} tracks skipped",
        bundle.scenario_id,
        all.counts.car,
        all.counts.pedestrian,
        all.counts.bicycle,
        all.counts.other,
        all.diagnostics.len()
    );
    Ok(all)
}
