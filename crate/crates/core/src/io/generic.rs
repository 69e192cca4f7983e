//! Generic trajectory files.
//!
//! CSV: header `id,frame,x,y` with an optional trailing `class` column, one
//! row per sample. JSON lines: one object per line,
//! `{"id": "...", "class": "pedestrian", "points": [{"x": 0.1, "y": 0.2, "frame": 0}, ...]}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{TrajPoint, Trajectory, UserClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenericFormat {
    Csv,
    JsonLines,
}

impl GenericFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson" | "json") => GenericFormat::JsonLines,
            _ => GenericFormat::Csv,
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    id: String,
    frame: u64,
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<String>,
}

/// Reads a generic CSV or JSON-lines file; trajectories come back sorted by id.
pub fn load_generic(path: &Path) -> Result<Vec<Trajectory>> {
    let mut out = match GenericFormat::from_path(path) {
        GenericFormat::Csv => load_csv(path)?,
        GenericFormat::JsonLines => load_jsonl(path)?,
    };
    if out.is_empty() {
        log::warn!("{}: no trajectories", path.display());
    }
    out.sort_by(|a, b| a.id().cmp(b.id()));
    Ok(out)
}

fn load_csv(path: &Path) -> Result<Vec<Trajectory>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    for col in ["id", "frame", "x", "y"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn {
                path: path.to_owned(),
                column: col.to_owned(),
            });
        }
    }

    let mut groups: BTreeMap<String, (Option<String>, Vec<TrajPoint>, u64)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_error(path, &e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line,
            reason: e.to_string(),
        })?;
        let entry = groups
            .entry(row.id)
            .or_insert_with(|| (row.class.clone(), Vec::new(), line));
        entry.1.push(TrajPoint::new(row.x, row.y, row.frame));
    }

    groups
        .into_iter()
        .map(|(id, (class, mut points, line))| {
            let class = match class.as_deref().filter(|c| !c.is_empty()) {
                Some(c) => c.parse().map_err(|reason| Error::Parse {
                    path: path.to_owned(),
                    line,
                    reason,
                })?,
                None => UserClass::Other,
            };
            points.sort_by_key(|p| p.frame);
            Trajectory::new(id, class, points).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line,
                reason: e.to_string(),
            })
        })
        .collect()
}

fn parse_error(path: &Path, e: &csv::Error) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line: e.position().map_or(0, |p| p.line()),
        reason: e.to_string(),
    }
}

fn load_jsonl(path: &Path) -> Result<Vec<Trajectory>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trajectory = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: i as u64 + 1,
            reason: e.to_string(),
        })?;
        out.push(t);
    }
    Ok(out)
}

/// Writes trajectories in the format implied by the file extension.
pub fn save_generic(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    match GenericFormat::from_path(path) {
        GenericFormat::JsonLines => {
            for t in trajectories {
                serde_json::to_writer(&mut w, t)?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
        }
        GenericFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(&mut w);
            for t in trajectories {
                for p in t.points() {
                    wtr.serialize(Row {
                        id: t.id().to_owned(),
                        frame: p.frame,
                        x: p.x,
                        y: p.y,
                        class: Some(t.class().as_str().to_owned()),
                    })?;
                }
            }
            if trajectories.is_empty() {
                wtr.write_record(["id", "frame", "x", "y", "class"])?;
            }
            wtr.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
