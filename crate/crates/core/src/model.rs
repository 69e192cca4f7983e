//! Trajectory data model, dataset-wide normalization and endpoint extraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// One sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint {
    pub x: f64,
    pub y: f64,
    pub frame: u64,
}

impl TrajPoint {
    pub const fn new(x: f64, y: f64, frame: u64) -> Self {
        Self { x, y, frame }
    }

    pub fn pos(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    Car,
    Pedestrian,
    Bicycle,
    Other,
}

impl UserClass {
    pub fn as_str(self) -> &'static str {
        match self {
            UserClass::Car => "car",
            UserClass::Pedestrian => "pedestrian",
            UserClass::Bicycle => "bicycle",
            UserClass::Other => "other",
        }
    }
}

impl fmt::Display for UserClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UserClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "car" => Ok(UserClass::Car),
            "pedestrian" => Ok(UserClass::Pedestrian),
            "bicycle" | "cyclist" => Ok(UserClass::Bicycle),
            "other" => Ok(UserClass::Other),
            other => Err(format!("unknown user class {other:?}")),
        }
    }
}

/// An ordered, validated sequence of timestamped positions.
///
/// Construction guarantees at least two points, finite coordinates and
/// strictly increasing frame indices. Instances are immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrajectory", into = "RawTrajectory")]
pub struct Trajectory {
    id: String,
    class: UserClass,
    points: Vec<TrajPoint>,
}

#[derive(Serialize, Deserialize)]
struct RawTrajectory {
    id: String,
    class: UserClass,
    points: Vec<TrajPoint>,
}

impl TryFrom<RawTrajectory> for Trajectory {
    type Error = Error;

    fn try_from(raw: RawTrajectory) -> Result<Self> {
        Trajectory::new(raw.id, raw.class, raw.points)
    }
}

impl From<Trajectory> for RawTrajectory {
    fn from(t: Trajectory) -> Self {
        RawTrajectory {
            id: t.id,
            class: t.class,
            points: t.points,
        }
    }
}

impl Trajectory {
    pub fn new(id: impl Into<String>, class: UserClass, points: Vec<TrajPoint>) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidTrajectory { id: id.clone(), reason };
        if points.len() < 2 {
            return Err(invalid(format!("needs at least 2 points, got {}", points.len())));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(invalid(format!("non-finite coordinate at point {i}")));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1].frame <= w[0].frame) {
            return Err(invalid(format!(
                "frames not strictly increasing ({} then {})",
                w[0].frame, w[1].frame
            )));
        }
        Ok(Self { id, class, points })
    }

    /// Builds a trajectory from bare positions, numbering frames from zero.
    pub fn from_positions(
        id: impl Into<String>,
        class: UserClass,
        positions: impl IntoIterator<Item = Point2>,
    ) -> Result<Self> {
        let points = positions
            .into_iter()
            .enumerate()
            .map(|(i, p)| TrajPoint::new(p.x, p.y, i as u64))
            .collect();
        Self::new(id, class, points)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn class(&self) -> UserClass {
        self.class
    }

    pub fn points(&self) -> &[TrajPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: a trajectory holds at least two points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.points.iter().map(TrajPoint::pos).collect()
    }

    pub fn first(&self) -> Point2 {
        self.points[0].pos()
    }

    pub fn last(&self) -> Point2 {
        self.points[self.points.len() - 1].pos()
    }

    /// Polyline length.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].pos().distance(w[1].pos())).sum()
    }

    fn map_positions(&self, f: impl Fn(Point2) -> Point2) -> Trajectory {
        let points = self
            .points
            .iter()
            .map(|p| {
                let q = f(p.pos());
                TrajPoint::new(q.x, q.y, p.frame)
            })
            .collect();
        Trajectory {
            id: self.id.clone(),
            class: self.class,
            points,
        }
    }

    /// Keeps every `step`-th sample, always retaining the final one.
    pub fn downsample(&self, step: usize) -> Trajectory {
        if step <= 1 {
            return self.clone();
        }
        let last = self.points.len() - 1;
        let points = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| i % step == 0 || *i == last)
            .map(|(_, p)| *p)
            .collect();
        Trajectory {
            id: self.id.clone(),
            class: self.class,
            points,
        }
    }
}

/// Per-dimension min/max of one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl NormalizationParams {
    pub fn fit(dataset: &[Trajectory]) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut p = NormalizationParams {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for pt in dataset.iter().flat_map(|t| t.points()) {
            p.x_min = p.x_min.min(pt.x);
            p.x_max = p.x_max.max(pt.x);
            p.y_min = p.y_min.min(pt.y);
            p.y_max = p.y_max.max(pt.y);
        }
        if p.x_max <= p.x_min {
            return Err(Error::DegenerateDimension {
                axis: 'x',
                value: p.x_min,
            });
        }
        if p.y_max <= p.y_min {
            return Err(Error::DegenerateDimension {
                axis: 'y',
                value: p.y_min,
            });
        }
        Ok(p)
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            (p.x - self.x_min) / (self.x_max - self.x_min),
            (p.y - self.y_min) / (self.y_max - self.y_min),
        )
    }

    pub fn invert(&self, p: Point2) -> Point2 {
        Point2::new(
            p.x * (self.x_max - self.x_min) + self.x_min,
            p.y * (self.y_max - self.y_min) + self.y_min,
        )
    }

    pub fn apply_trajectory(&self, t: &Trajectory) -> Trajectory {
        t.map_positions(|p| self.apply(p))
    }

    pub fn invert_trajectory(&self, t: &Trajectory) -> Trajectory {
        t.map_positions(|p| self.invert(p))
    }
}

/// Maps every coordinate to `(v - min) / (max - min)` using dataset-wide
/// per-dimension bounds, so all trajectories share one frame.
pub fn normalize(dataset: &[Trajectory]) -> Result<(Vec<Trajectory>, NormalizationParams)> {
    let params = NormalizationParams::fit(dataset)?;
    let out = dataset.iter().map(|t| params.apply_trajectory(t)).collect();
    Ok((out, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointPair {
    pub start: Point2,
    pub end: Point2,
}

impl EndpointPair {
    /// `(start_x, start_y, end_x, end_y)`.
    pub fn to_array(self) -> [f64; 4] {
        [self.start.x, self.start.y, self.end.x, self.end.y]
    }
}

pub fn endpoints(t: &Trajectory) -> EndpointPair {
    EndpointPair {
        start: t.first(),
        end: t.last(),
    }
}
