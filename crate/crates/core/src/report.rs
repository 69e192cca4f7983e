//! SVG plots of a partition and an HTML index embedding them.
//!
//! One figure per cluster: members as thin polylines, the medoid as a thick
//! one, a white cross at every start and a black cross at every end, on a
//! gray background. An overview figure overlays every cluster. Output is
//! byte-identical for identical input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::cluster::{Cluster, Partition};
use crate::error::{Error, Result};
use crate::model::{NormalizationParams, Point2, Trajectory};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const CROSS: f64 = 4.0;
const BACKGROUND: &str = "#808080";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#393b79",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportSpec {
    pub out_dir: PathBuf,
    pub per_cluster: bool,
    pub overview: bool,
    /// Plot in original coordinates when normalization parameters are given.
    pub denormalize: bool,
}

impl ReportSpec {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            per_cluster: true,
            overview: true,
            denormalize: true,
        }
    }
}

pub fn cluster_file_name(index: usize) -> String {
    format!("cluster_{index:03}.svg")
}

struct Frame {
    min: Point2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(paths: &[Vec<Point2>]) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in paths.iter().flatten() {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        if !min.x.is_finite() {
            return Self {
                min: Point2::default(),
                scale: 1.0,
                height: 0.0,
            };
        }
        let span = (max.x - min.x).max(max.y - min.y);
        let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
        Self {
            min,
            scale,
            height: max.y - min.y,
        }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        let x = MARGIN + (p.x - self.min.x) * self.scale;
        let y = MARGIN + (self.height - (p.y - self.min.y)) * self.scale;
        (x, y)
    }

    fn points_attr(&self, path: &[Point2]) -> String {
        let mut s = String::with_capacity(path.len() * 16);
        for (i, p) in path.iter().enumerate() {
            let (x, y) = self.map(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }

    fn cross(&self, p: Point2, color: &str, out: &mut String) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            out,
            r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            x - CROSS,
            y - CROSS,
            x + CROSS,
            y + CROSS,
            x - CROSS,
            y + CROSS,
            x + CROSS,
            y - CROSS
        );
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"{BACKGROUND}\"/>\n"
    )
}

fn polyline(frame: &Frame, path: &[Point2], color: &str, width: f64, class: &str) -> String {
    format!(
        "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" stroke-linejoin=\"round\"/>\n",
        frame.points_attr(path)
    )
}

fn cluster_svg(index: usize, cluster: &Cluster, paths: &[Vec<Point2>], frame: &Frame) -> String {
    let color = PALETTE[index % PALETTE.len()];
    let mut s = svg_open(&format!("cluster {index}"));
    for &m in cluster.members.iter().filter(|&&m| m != cluster.medoid) {
        s.push_str(&polyline(frame, &paths[m], color, 1.0, "member"));
    }
    s.push_str(&polyline(frame, &paths[cluster.medoid], color, 4.0, "medoid"));
    for &m in &cluster.members {
        let path = &paths[m];
        frame.cross(path[0], "#ffffff", &mut s);
        frame.cross(path[path.len() - 1], "#000000", &mut s);
    }
    s.push_str("</svg>\n");
    s
}

fn overview_svg(partition: &Partition, paths: &[Vec<Point2>], frame: &Frame) -> String {
    let mut s = svg_open("overview");
    for i in partition.rejected() {
        s.push_str(&polyline(frame, &paths[i], "#c8c8c8", 0.5, "rejected"));
    }
    for (c, cluster) in partition.clusters().iter().enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        for &m in cluster.members.iter().filter(|&&m| m != cluster.medoid) {
            s.push_str(&polyline(frame, &paths[m], color, 1.0, "member"));
        }
    }
    for (c, cluster) in partition.clusters().iter().enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        s.push_str(&polyline(frame, &paths[cluster.medoid], color, 4.0, "medoid"));
    }
    s.push_str("</svg>\n");
    s
}

fn html_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn index_html(
    partition: &Partition,
    dataset: &[Trajectory],
    svgs: &[(String, String)],
    overview: Option<&str>,
) -> String {
    let clusters = partition.clusters();
    let mut s = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Clustering report</title>\n\
         <style>body{font-family:sans-serif}table{border-collapse:collapse}td,th{border:1px solid #999;padding:2px 8px}\
         figure{display:inline-block;margin:8px}</style>\n</head>\n<body>\n",
    );
    let _ = writeln!(
        s,
        "<h1>{} clusters</h1>\n<p>{} trajectories, {} rejected</p>",
        clusters.len(),
        partition.n(),
        partition.n_rejected()
    );
    if !clusters.is_empty() {
        s.push_str("<table>\n<tr><th>cluster</th><th>size</th><th>spread</th><th>medoid</th></tr>\n");
        for (i, c) in clusters.iter().enumerate() {
            let _ = writeln!(
                s,
                "<tr><td>{i}</td><td>{}</td><td>{:.4}</td><td>{}</td></tr>",
                c.len(),
                c.spread,
                html_escape(dataset[c.medoid].id())
            );
        }
        s.push_str("</table>\n");
    }
    if let Some(o) = overview {
        let _ = writeln!(s, "<h2>Overview</h2>\n<figure>\n{o}</figure>");
    }
    for (name, svg) in svgs {
        let _ = writeln!(s, "<figure>\n<figcaption>{name}</figcaption>\n{svg}</figure>");
    }
    s.push_str("</body>\n</html>\n");
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Renders the report into `spec.out_dir` and returns the files written,
/// `index.html` last.
pub fn render_report(
    partition: &Partition,
    dataset: &[Trajectory],
    normalization: Option<&NormalizationParams>,
    spec: &ReportSpec,
) -> Result<Vec<PathBuf>> {
    if partition.n() != dataset.len() {
        return Err(Error::InvalidParameter(format!(
            "partition covers {} items, dataset has {}",
            partition.n(),
            dataset.len()
        )));
    }
    fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;

    let paths: Vec<Vec<Point2>> = dataset
        .iter()
        .map(|t| match normalization.filter(|_| spec.denormalize) {
            Some(p) => t.points().iter().map(|q| p.invert(q.pos())).collect(),
            None => t.positions(),
        })
        .collect();
    let frame = Frame::fit(&paths);

    let svgs: Vec<(String, String)> = if spec.per_cluster {
        partition
            .clusters()
            .par_iter()
            .enumerate()
            .map(|(i, c)| (cluster_file_name(i), cluster_svg(i, c, &paths, &frame)))
            .collect()
    } else {
        Vec::new()
    };
    let overview = spec.overview.then(|| overview_svg(partition, &paths, &frame));

    let mut written = Vec::new();
    for (name, svg) in &svgs {
        let p = spec.out_dir.join(name);
        write(&p, svg)?;
        written.push(p);
    }
    if let Some(o) = &overview {
        let p = spec.out_dir.join("overview.svg");
        write(&p, o)?;
        written.push(p);
    }
    let index = spec.out_dir.join("index.html");
    write(&index, &index_html(partition, dataset, &svgs, overview.as_deref()))?;
    written.push(index);
    Ok(written)
}
