//! Synthetic intersection scenes with known maneuver labels.
//!
//! Each template is a polyline in the unit square. Members are resampled at a
//! fixed arc-length step, optionally truncated at the start, and perturbed by
//! independent Gaussian noise per point. Outliers are clamped random walks.
//! Trajectory `i` draws from its own ChaCha stream, so output does not depend
//! on generation order.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Point2, Trajectory, UserClass};

/// A maneuver path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverTemplate {
    pub name: String,
    pub waypoints: Vec<Point2>,
}

impl ManeuverTemplate {
    pub fn straight(name: impl Into<String>, from: Point2, to: Point2) -> Self {
        Self {
            name: name.into(),
            waypoints: vec![from, to],
        }
    }

    /// Straight approach to `corner`, a quarter-circle turn of `radius`, then
    /// straight on to `to`. The two legs must be axis-aligned and perpendicular.
    pub fn turn(name: impl Into<String>, from: Point2, corner: Point2, to: Point2, radius: f64) -> Self {
        let unit = |a: Point2, b: Point2| {
            let d = a.distance(b);
            Point2::new((b.x - a.x) / d, (b.y - a.y) / d)
        };
        let u = unit(from, corner);
        let v = unit(corner, to);
        let entry = Point2::new(corner.x - u.x * radius, corner.y - u.y * radius);
        let exit = Point2::new(corner.x + v.x * radius, corner.y + v.y * radius);
        let center = Point2::new(entry.x + v.x * radius, entry.y + v.y * radius);
        let a0 = (entry.y - center.y).atan2(entry.x - center.x);
        let a1 = (exit.y - center.y).atan2(exit.x - center.x);
        let mut sweep = a1 - a0;
        if sweep > std::f64::consts::PI {
            sweep -= 2.0 * std::f64::consts::PI;
        } else if sweep < -std::f64::consts::PI {
            sweep += 2.0 * std::f64::consts::PI;
        }
        debug_assert!((sweep.abs() - FRAC_PI_2).abs() < 1e-9);
        let mut waypoints = vec![from];
        let steps = 24;
        for s in 0..=steps {
            let a = a0 + sweep * s as f64 / steps as f64;
            waypoints.push(Point2::new(center.x + radius * a.cos(), center.y + radius * a.sin()));
        }
        waypoints.push(to);
        Self {
            name: name.into(),
            waypoints,
        }
    }

    pub fn arc_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Points at arc lengths `offset, offset + step, ...`, ending exactly on
    /// the final waypoint.
    pub fn resample(&self, offset: f64, step: f64) -> Vec<Point2> {
        let total = self.arc_length();
        let mut out = Vec::new();
        let mut s = offset;
        while s < total - 1e-12 {
            out.push(self.point_at(s));
            s += step;
        }
        out.push(*self.waypoints.last().expect("template has waypoints"));
        out
    }

    fn point_at(&self, s: f64) -> Point2 {
        let mut left = s;
        for w in self.waypoints.windows(2) {
            let len = w[0].distance(w[1]);
            if left <= len && len > 0.0 {
                let t = left / len;
                return Point2::new(w[0].x + t * (w[1].x - w[0].x), w[0].y + t * (w[1].y - w[0].y));
            }
            left -= len;
        }
        *self.waypoints.last().expect("template has waypoints")
    }
}

/// Four maneuvers through a crossing centered at (0.5, 0.5).
pub fn intersection_templates() -> Vec<ManeuverTemplate> {
    let p = Point2::new;
    vec![
        ManeuverTemplate::straight("straight_we", p(0.0, 0.45), p(1.0, 0.45)),
        ManeuverTemplate::turn("left_sw", p(0.55, 0.0), p(0.55, 0.55), p(0.0, 0.55), 0.2),
        ManeuverTemplate::turn("right_en", p(1.0, 0.6), p(0.6, 0.6), p(0.6, 1.0), 0.15),
        ManeuverTemplate::straight("crossing_ns", p(0.3, 1.0), p(0.3, 0.0)),
    ]
}

/// Two maneuvers sharing their first 70 % of path: a straight run and a turn
/// branching off it.
pub fn shared_path_templates() -> Vec<ManeuverTemplate> {
    let p = Point2::new;
    vec![
        ManeuverTemplate::straight("through", p(0.0, 0.5), p(1.0, 0.5)),
        ManeuverTemplate {
            name: "branch".into(),
            waypoints: vec![p(0.0, 0.5), p(0.7, 0.5), p(0.7, 0.8)],
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub templates: Vec<ManeuverTemplate>,
    pub per_template: usize,
    /// Standard deviation of the per-point Gaussian noise.
    pub sigma: f64,
    pub outliers: usize,
    /// Fraction of arc length removed from the start, drawn uniformly from
    /// this range; `(0, 0)` disables truncation.
    pub truncate: (f64, f64),
    /// Arc-length distance between samples.
    pub step: f64,
    pub seed: u64,
    pub class: UserClass,
}

impl SyntheticSpec {
    pub fn intersection(per_template: usize, sigma: f64, outliers: usize, seed: u64) -> Self {
        Self {
            templates: intersection_templates(),
            per_template,
            sigma,
            outliers,
            truncate: (0.0, 0.0),
            step: 0.02,
            seed,
            class: UserClass::Car,
        }
    }

    pub fn shared_path(per_template: usize, sigma: f64, outliers: usize, seed: u64) -> Self {
        Self {
            templates: shared_path_templates(),
            ..Self::intersection(per_template, sigma, outliers, seed)
        }
    }

    pub fn with_truncation(mut self, lo: f64, hi: f64) -> Self {
        self.truncate = (lo, hi);
        self
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.truncate;
        if self
            .templates
            .iter()
            .any(|t| t.waypoints.len() < 2 || t.arc_length() <= 0.0)
        {
            return Err(Error::InvalidParameter("templates need positive length".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma {} must be finite and ≥ 0",
                self.sigma
            )));
        }
        if !(0.0..1.0).contains(&lo) || !(lo..1.0).contains(&hi) {
            return Err(Error::InvalidParameter(format!(
                "truncation range ({lo}, {hi}) must satisfy 0 ≤ lo ≤ hi < 1"
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("step {} must be positive", self.step)));
        }
        Ok(())
    }
}

/// Ground-truth origin of a synthetic trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundTruth {
    Template(usize),
    Outlier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub trajectories: Vec<Trajectory>,
    /// Parallel to `trajectories`.
    pub labels: Vec<GroundTruth>,
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn template_member(spec: &SyntheticSpec, tpl: &ManeuverTemplate, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let (lo, hi) = spec.truncate;
    let frac = if hi > lo { rng.random_range(lo..hi) } else { lo };
    let mut pts = tpl.resample(frac * tpl.arc_length(), spec.step);
    if spec.sigma > 0.0 {
        let noise = Normal::new(0.0, spec.sigma).expect("sigma validated");
        for p in &mut pts {
            p.x += noise.sample(rng);
            p.y += noise.sample(rng);
        }
    }
    pts
}

fn outlier(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let mean_len = spec.templates.iter().map(|t| t.arc_length()).sum::<f64>() / spec.templates.len() as f64;
    let n = ((mean_len / spec.step).round() as usize).max(2);
    let turn = Normal::new(0.0, 0.6).expect("constant");
    let mut p = Point2::new(rng.random_range(0.1..0.9), rng.random_range(0.1..0.9));
    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let stride = spec.step * 1.5;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(p);
        heading += turn.sample(rng);
        p = Point2::new(
            (p.x + stride * heading.cos()).clamp(0.0, 1.0),
            (p.y + stride * heading.sin()).clamp(0.0, 1.0),
        );
    }
    out
}

/// Generates template members (template order) followed by outliers.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut trajectories = Vec::new();
    let mut labels = Vec::new();
    let mut index = 0usize;
    let mut push = |pts: Vec<Point2>, label: GroundTruth, index: usize| -> Result<()> {
        trajectories.push(Trajectory::from_positions(format!("syn{index:05}"), spec.class, pts)?);
        labels.push(label);
        Ok(())
    };
    for (t, tpl) in spec.templates.iter().enumerate() {
        for _ in 0..spec.per_template {
            let mut rng = rng_for(spec.seed, index);
            push(template_member(spec, tpl, &mut rng), GroundTruth::Template(t), index)?;
            index += 1;
        }
    }
    for _ in 0..spec.outliers {
        let mut rng = rng_for(spec.seed, index);
        push(outlier(spec, &mut rng), GroundTruth::Outlier, index)?;
        index += 1;
    }
    Ok(SyntheticDataset { trajectories, labels })
}
