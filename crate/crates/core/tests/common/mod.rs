//! Direct-formula reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the optimized code paths.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trajclust::io::GroundTruth;
use trajclust::{DissimilarityMatrix, Partition, Point2, Trajectory, UserClass};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum cost over every monotone warping path, by exhaustive recursion.
pub fn dtw_enumerate(a: &[Point2], b: &[Point2]) -> f64 {
    fn walk(a: &[Point2], b: &[Point2], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + a[i].distance(b[j]);
        if i == a.len() - 1 && j == b.len() - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

pub fn random_path(rng: &mut ChaCha8Rng, len: usize) -> Vec<Point2> {
    (0..len)
        .map(|_| Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect()
}

pub fn random_trajectory(rng: &mut ChaCha8Rng, id: usize, len: usize) -> Trajectory {
    Trajectory::from_positions(format!("r{id:04}"), UserClass::Other, random_path(rng, len)).unwrap()
}

/// Symmetric matrix with zero diagonal and off-diagonal entries in (0.1, 10).
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DissimilarityMatrix {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.random_range(0.1..10.0);
            v[i * n + j] = d;
            v[j * n + i] = d;
        }
    }
    DissimilarityMatrix::from_dense(n, v).unwrap()
}

/// Random grouping of `0..n` into at most `max_clusters` non-empty groups.
pub fn random_groups(rng: &mut ChaCha8Rng, n: usize, max_clusters: usize) -> Vec<Vec<usize>> {
    let k = rng.random_range(1..=max_clusters.min(n));
    let mut groups: Vec<Vec<usize>> = (0..k).map(|g| vec![g]).collect();
    for i in k..n {
        let g = rng.random_range(0..k);
        groups[g].push(i);
    }
    groups
}

pub fn oracle_medoid(members: &[usize], m: &DissimilarityMatrix) -> usize {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    let mut best = (f64::INFINITY, usize::MAX);
    for &c in &sorted {
        let s: f64 = sorted.iter().map(|&j| m.get(c, j)).sum();
        if s < best.0 {
            best = (s, c);
        }
    }
    best.1
}

pub fn oracle_spread(members: &[usize], m: &DissimilarityMatrix) -> f64 {
    let med = oracle_medoid(members, m);
    members.iter().map(|&j| m.get(med, j)).sum::<f64>() / members.len() as f64
}

/// Average linkage between two groups.
pub fn oracle_linkage(a: &[usize], b: &[usize], m: &DissimilarityMatrix) -> f64 {
    let mut s = 0.0;
    for &i in a {
        for &j in b {
            s += m.get(i, j);
        }
    }
    s / (a.len() * b.len()) as f64
}

/// Textbook average-linkage agglomeration: recompute every pairwise linkage
/// from scratch at each step.
pub fn oracle_agglomerative(m: &DissimilarityMatrix, k: usize) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..m.len()).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let d = oracle_linkage(&clusters[a], &clusters[b], m);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (_, a, b) = best;
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
    }
    clusters
}

fn medoid_table(groups: &[Vec<usize>], m: &DissimilarityMatrix) -> Vec<(usize, f64)> {
    groups
        .iter()
        .map(|g| (oracle_medoid(g, m), oracle_spread(g, m)))
        .collect()
}

fn ratio(groups: &[Vec<usize>], m: &DissimilarityMatrix) -> Vec<Vec<f64>> {
    let t = medoid_table(groups, m);
    let nc = groups.len();
    let mut r = vec![vec![0.0; nc]; nc];
    for i in 0..nc {
        for j in 0..nc {
            if i != j {
                r[i][j] = (t[i].1 + t[j].1) / m.get(t[i].0, t[j].0);
            }
        }
    }
    r
}

#[allow(clippy::needless_range_loop)]
pub fn oracle_db_original(groups: &[Vec<usize>], m: &DissimilarityMatrix) -> f64 {
    let r = ratio(groups, m);
    let nc = groups.len();
    let mut total = 0.0;
    for i in 0..nc {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..nc {
            if i != j && r[i][j] > worst {
                worst = r[i][j];
            }
        }
        total += worst;
    }
    total / nc as f64
}

pub fn oracle_db_modified(groups: &[Vec<usize>], m: &DissimilarityMatrix) -> f64 {
    let r = ratio(groups, m);
    let nc = groups.len() as f64;
    let mut total = 0.0;
    for (i, row) in r.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                total += v;
            }
        }
    }
    total / nc / (nc - 1.0)
}

pub fn oracle_silhouette(groups: &[Vec<usize>], m: &DissimilarityMatrix) -> f64 {
    let mut scores = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        for &i in g {
            if g.len() == 1 {
                scores.push(0.0);
                continue;
            }
            let a = g.iter().filter(|&&j| j != i).map(|&j| m.get(i, j)).sum::<f64>() / (g.len() - 1) as f64;
            let mut b = f64::INFINITY;
            for (gj, h) in groups.iter().enumerate() {
                if gj == gi {
                    continue;
                }
                let mean = h.iter().map(|&j| m.get(i, j)).sum::<f64>() / h.len() as f64;
                b = b.min(mean);
            }
            let denom = a.max(b);
            scores.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

pub fn oracle_spread_on_cluster(groups: &[Vec<usize>], m: &DissimilarityMatrix) -> f64 {
    let mut total = 0.0;
    for g in groups {
        let mut max = 0.0f64;
        for &i in g {
            for &j in g {
                max = max.max(m.get(i, j));
            }
        }
        total += max / g.len() as f64;
    }
    total / groups.len() as f64
}

/// Share of clustered items carrying their cluster's majority label.
pub fn purity(p: &Partition, truth: &[GroundTruth]) -> f64 {
    let mut hit = 0usize;
    for c in p.clusters() {
        let mut counts: HashMap<GroundTruth, usize> = HashMap::new();
        for &m in &c.members {
            *counts.entry(truth[m]).or_default() += 1;
        }
        hit += counts.values().copied().max().unwrap_or(0);
    }
    if p.n_clustered() == 0 {
        return 0.0;
    }
    hit as f64 / p.n_clustered() as f64
}

/// Normalized groups for comparison: each sorted, ordered by first member.
pub fn canonical(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.retain(|g| !g.is_empty());
    groups.sort();
    groups
}

/// Straight horizontal polyline `n` samples long at height `y`, offset in x.
pub fn line(id: &str, x0: f64, y: f64, n: usize) -> Trajectory {
    Trajectory::from_positions(
        id,
        UserClass::Other,
        (0..n).map(|i| Point2::new(x0 + i as f64 / (n - 1) as f64, y)),
    )
    .unwrap()
}
