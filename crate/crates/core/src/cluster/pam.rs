//! Partitioning around medoids with a deterministic greedy BUILD.

use crate::cluster::Partition;
use crate::dtw::{medoid, DissimilarityMatrix};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;

/// Greedy BUILD: the first medoid minimizes total distance, each further one
/// maximizes the reduction of the assignment cost. Ties go to the lowest index.
pub fn build_medoids(matrix: &DissimilarityMatrix, k: usize) -> Vec<usize> {
    let n = matrix.len();
    let mut medoids = Vec::with_capacity(k);
    let mut is_medoid = vec![false; n];

    let first = (0..n)
        .map(|i| (matrix.row(i).iter().sum::<f64>(), i))
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
        .1;
    medoids.push(first);
    is_medoid[first] = true;
    let mut nearest: Vec<f64> = matrix.row(first).to_vec();

    while medoids.len() < k {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for c in (0..n).filter(|&c| !is_medoid[c]) {
            let row = matrix.row(c);
            let gain: f64 = nearest.iter().zip(row).map(|(&near, &d)| (near - d).max(0.0)).sum();
            if gain > best.0 {
                best = (gain, c);
            }
        }
        let c = best.1;
        medoids.push(c);
        is_medoid[c] = true;
        for (near, &d) in nearest.iter_mut().zip(matrix.row(c)) {
            if d < *near {
                *near = d;
            }
        }
    }
    medoids
}

/// Index into `medoids` of the closest medoid; ties go to the smallest medoid index.
fn nearest_medoid(matrix: &DissimilarityMatrix, medoids: &[usize], i: usize) -> usize {
    let mut best = (f64::INFINITY, usize::MAX, 0);
    for (slot, &m) in medoids.iter().enumerate() {
        let d = matrix.get(i, m);
        if d < best.0 || (d == best.0 && m < best.1) {
            best = (d, m, slot);
        }
    }
    best.2
}

/// k-medoids: BUILD, then alternate nearest-medoid assignment and per-cluster
/// medoid recomputation until assignments stop changing or the iteration cap
/// is hit (the partition is then flagged non-converged).
pub fn pam(matrix: &DissimilarityMatrix, k: usize) -> Result<Partition> {
    let n = matrix.len();
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, min: 2, max: n });
    }
    let mut medoids = build_medoids(matrix, k);
    let mut previous: Option<Vec<usize>> = None;
    let mut converged = false;
    let mut assignment = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        assignment = (0..n).map(|i| nearest_medoid(matrix, &medoids, i)).collect();
        if previous.as_ref() == Some(&assignment) {
            converged = true;
            break;
        }
        for (slot, m) in medoids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == slot).collect();
            if !members.is_empty() {
                *m = medoid(&members, matrix)?;
            }
        }
        previous = Some(assignment.clone());
    }

    let mut groups = vec![Vec::new(); k];
    for (i, &slot) in assignment.iter().enumerate() {
        groups[slot].push(i);
    }
    Ok(Partition::from_groups(n, groups, matrix, k)?.with_converged(converged))
}
