//! Flat-kernel mean-shift for small fixed-dimension point sets.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;
pub const SHIFT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_QUANTILE: f64 = 0.3;

/// Kernel radius, fixed or estimated from the pairwise-distance quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    Auto { quantile: f64 },
    Fixed(f64),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Auto {
            quantile: DEFAULT_QUANTILE,
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Auto { quantile } if *quantile == DEFAULT_QUANTILE => f.write_str("auto"),
            Bandwidth::Auto { quantile } => write!(f, "auto:{quantile}"),
            Bandwidth::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = String;

    /// `auto`, `auto:<quantile>` or a positive number.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Bandwidth::default());
        }
        if let Some(q) = s.strip_prefix("auto:") {
            let quantile: f64 = q.parse().map_err(|_| format!("bad quantile {q:?}"))?;
            if !(quantile > 0.0 && quantile <= 1.0) {
                return Err(format!("quantile {quantile} outside (0, 1]"));
            }
            return Ok(Bandwidth::Auto { quantile });
        }
        let v: f64 = s.parse().map_err(|_| format!("bad bandwidth {s:?}"))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("bandwidth must be positive, got {v}"));
        }
        Ok(Bandwidth::Fixed(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanShiftResult<const D: usize> {
    /// Mode id of every input point.
    pub assignments: Vec<usize>,
    pub modes: Vec<[f64; D]>,
    pub bandwidth: f64,
}

impl<const D: usize> MeanShiftResult<D> {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }
}

#[inline]
fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Quantile of all pairwise distances, falling back to the smallest non-zero
/// distance when the quantile is zero. `None` when every distance is zero.
pub fn estimate_bandwidth<const D: usize>(points: &[[f64; D]], quantile: f64) -> Option<f64> {
    let mut d: Vec<f64> = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            d.push(dist(&points[i], &points[j]));
        }
    }
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let q = quantile_sorted(&d, quantile);
    if q > 0.0 {
        return Some(q);
    }
    d.into_iter().find(|&v| v > 0.0)
}

fn shift_point<const D: usize>(start: [f64; D], points: &[[f64; D]], bandwidth: f64) -> [f64; D] {
    let mut x = start;
    for _ in 0..MAX_ITERATIONS {
        let mut sum = [0.0; D];
        let mut count = 0usize;
        for p in points {
            if dist(&x, p) <= bandwidth {
                for (s, v) in sum.iter_mut().zip(p) {
                    *s += v;
                }
                count += 1;
            }
        }
        if count == 0 {
            break;
        }
        let mut next = [0.0; D];
        for (nx, s) in next.iter_mut().zip(sum) {
            *nx = s / count as f64;
        }
        let shift = dist(&x, &next);
        x = next;
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    x
}

/// Flat-kernel mean-shift. Every point climbs independently to its mode;
/// converged positions within `bandwidth / 2` of an earlier mode join it,
/// scanning points in input order.
pub fn mean_shift<const D: usize>(points: &[[f64; D]], bandwidth: Bandwidth) -> Result<MeanShiftResult<D>> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("mean-shift on an empty point set".into()));
    }
    let bw = match bandwidth {
        Bandwidth::Fixed(v) if v > 0.0 && v.is_finite() => v,
        Bandwidth::Fixed(v) => return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {v}"))),
        Bandwidth::Auto { quantile } => {
            if !(quantile > 0.0 && quantile <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "bandwidth quantile {quantile} outside (0, 1]"
                )));
            }
            match estimate_bandwidth(points, quantile) {
                Some(v) => v,
                None => {
                    // All points coincide (or there is only one).
                    return Ok(MeanShiftResult {
                        assignments: vec![0; points.len()],
                        modes: vec![points[0]],
                        bandwidth: 1.0,
                    });
                }
            }
        }
    };

    let converged: Vec<[f64; D]> = points.par_iter().map(|&p| shift_point(p, points, bw)).collect();

    let mut modes: Vec<[f64; D]> = Vec::new();
    let assignments = converged
        .iter()
        .map(|x| match modes.iter().position(|m| dist(m, x) <= bw / 2.0) {
            Some(id) => id,
            None => {
                modes.push(*x);
                modes.len() - 1
            }
        })
        .collect();
    Ok(MeanShiftResult {
        assignments,
        modes,
        bandwidth: bw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_one_mode() {
        let pts = [[0.4, 0.4]; 5];
        let r = mean_shift(&pts, Bandwidth::default()).unwrap();
        assert_eq!(r.modes, vec![[0.4, 0.4]]);
        assert_eq!(r.assignments, vec![0; 5]);
        let r = mean_shift(&pts, Bandwidth::Fixed(0.1)).unwrap();
        assert_eq!(r.n_modes(), 1);
    }

    #[test]
    fn far_apart_points_stay_apart() {
        let r = mean_shift(&[[0.0, 0.0], [10.0, 0.0]], Bandwidth::Fixed(1.0)).unwrap();
        assert_eq!(r.modes, vec![[0.0, 0.0], [10.0, 0.0]]);
        assert_eq!(r.assignments, vec![0, 1]);
    }

    #[test]
    fn rejects_bad_bandwidth() {
        assert!(mean_shift(&[[0.0, 0.0]], Bandwidth::Fixed(0.0)).is_err());
        assert!(mean_shift(&[[0.0, 0.0]], Bandwidth::Fixed(-1.0)).is_err());
        assert!(mean_shift::<2>(&[], Bandwidth::default()).is_err());
    }

    #[test]
    fn auto_falls_back_to_smallest_nonzero() {
        // 6 pairs, 5 zero: the 0.3 quantile is 0.
        let pts = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]];
        assert_eq!(estimate_bandwidth(&pts, 0.3), Some(0.5));
        assert_eq!(estimate_bandwidth(&[[1.0, 1.0]], 0.3), None);
    }

    #[test]
    fn four_dimensional() {
        let pts = [
            [0.0, 0.0, 1.0, 1.0],
            [0.01, 0.0, 1.0, 0.99],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.01, 0.0, 1.0],
        ];
        let r = mean_shift(&pts, Bandwidth::Fixed(0.1)).unwrap();
        assert_eq!(r.assignments, vec![0, 0, 1, 1]);
    }

    #[test]
    fn parse_bandwidth() {
        assert_eq!("auto".parse::<Bandwidth>().unwrap(), Bandwidth::default());
        assert_eq!(
            "auto:0.2".parse::<Bandwidth>().unwrap(),
            Bandwidth::Auto { quantile: 0.2 }
        );
        assert_eq!("0.05".parse::<Bandwidth>().unwrap(), Bandwidth::Fixed(0.05));
        assert!("-2".parse::<Bandwidth>().is_err());
        assert!("auto:1.5".parse::<Bandwidth>().is_err());
    }
}
