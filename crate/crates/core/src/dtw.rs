//! Dynamic time warping, the pairwise dissimilarity matrix and medoids.
//!
//! The distance uses the standard three-step recursion
//! `γ(i, j) = d(r_i, s_j) + min(γ(i-1, j), γ(i, j-1), γ(i-1, j-1))`
//! with 2-D Euclidean point distance and no warping window. The result is
//! `γ(n-1, m-1)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Point2, Trajectory};
use crate::parallel::with_workers;

/// DTW distance between two point sequences.
///
/// Two rolling rows sized by the shorter sequence are kept, so memory is
/// `O(min(n, m))`. The result is exactly symmetric in its arguments.
pub fn dtw_points(a: &[Point2], b: &[Point2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (rows, cols) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let m = cols.len();
    let mut prev = vec![0.0; m];
    let mut cur = vec![0.0; m];

    prev[0] = rows[0].distance(cols[0]);
    for j in 1..m {
        prev[j] = prev[j - 1] + rows[0].distance(cols[j]);
    }
    for r in &rows[1..] {
        cur[0] = prev[0] + r.distance(cols[0]);
        for j in 1..m {
            let best = prev[j].min(cur[j - 1]).min(prev[j - 1]);
            cur[j] = r.distance(cols[j]) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// DTW distance between two trajectories.
pub fn dtw(a: &Trajectory, b: &Trajectory) -> f64 {
    // Trajectories always hold at least two points.
    dtw_points(&a.positions(), &b.positions()).expect("trajectories are non-empty")
}

/// Full cumulative-cost table, kept for debugging and cross-checking the
/// rolling-row implementation. Entry `[i][j]` is `γ(i, j)`.
pub fn dtw_full_table(a: &[Point2], b: &[Point2]) -> Result<Vec<Vec<f64>>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (n, m) = (a.len(), b.len());
    let mut g = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let d = a[i].distance(b[j]);
            g[i][j] = match (i, j) {
                (0, 0) => d,
                (0, _) => g[0][j - 1] + d,
                (_, 0) => g[i - 1][0] + d,
                _ => d + g[i - 1][j].min(g[i][j - 1]).min(g[i - 1][j - 1]),
            };
        }
    }
    Ok(g)
}

/// Dense symmetric matrix of pairwise DTW distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Validates and wraps a row-major `n × n` buffer.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} values for n = {n}, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative distance"
                    )));
                }
                if values[j * n + i] != v {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Builds from the strict upper triangle, row-major (`(0,1), (0,2), …, (n-2,n-1)`).
    pub fn from_upper_triangle(n: usize, upper: &[f64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::InvalidMatrix(format!(
                "expected {expected} upper-triangle values, got {}",
                upper.len()
            )));
        }
        let mut values = vec![0.0; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().unwrap();
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::from_dense(n, values)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }

    /// Matrix restricted to `indices`, in that order.
    pub fn submatrix(&self, indices: &[usize]) -> DissimilarityMatrix {
        let k = indices.len();
        let mut values = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                values.push(self.get(i, j));
            }
        }
        DissimilarityMatrix { n: k, values }
    }
}

/// Computes every pairwise DTW distance of `dataset` on the current rayon pool.
///
/// Only the upper triangle is evaluated and mirrored. Each entry depends on
/// its pair alone, so the output is bit-identical for any worker count.
pub fn build_matrix(dataset: &[Trajectory]) -> Result<DissimilarityMatrix> {
    let n = dataset.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let series: Vec<Vec<Point2>> = dataset.iter().map(Trajectory::positions).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| {
                    dtw_points(&series[i], &series[j]).map_err(|e| Error::PairFailed {
                        a: dataset[i].id().to_owned(),
                        b: dataset[j].id().to_owned(),
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + 1 + offset;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(DissimilarityMatrix { n, values })
}

/// [`build_matrix`] on a dedicated pool of `workers` threads (0 = rayon default).
pub fn build_matrix_with_workers(dataset: &[Trajectory], workers: usize) -> Result<DissimilarityMatrix> {
    with_workers(workers, || build_matrix(dataset))?
}

/// Reference single-threaded build, one `dtw` call per unordered pair.
pub fn build_matrix_sequential(dataset: &[Trajectory]) -> Result<DissimilarityMatrix> {
    let n = dataset.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dtw(&dataset[i], &dataset[j]);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(DissimilarityMatrix { n, values })
}

/// The member minimizing the summed distance to all members; ties go to
/// the smallest index.
pub fn medoid(members: &[usize], matrix: &DissimilarityMatrix) -> Result<usize> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best = (f64::INFINITY, usize::MAX);
    for &c in &sorted {
        let row = matrix.row(c);
        let sum: f64 = sorted.iter().map(|&j| row[j]).sum();
        if sum < best.0 {
            best = (sum, c);
        }
    }
    Ok(best.1)
}

/// Mean distance from the medoid to every member (the medoid contributes 0).
pub fn cluster_spread(members: &[usize], medoid: usize, matrix: &DissimilarityMatrix) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let row = matrix.row(medoid);
    let sum: f64 = members.iter().map(|&j| row[j]).sum();
    Ok(sum / members.len() as f64)
}

/// SHA-256 over the ids, classes, frames and coordinates of a dataset.
pub fn dataset_hash(dataset: &[Trajectory]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((dataset.len() as u64).to_le_bytes());
    for t in dataset {
        h.update((t.id().len() as u64).to_le_bytes());
        h.update(t.id().as_bytes());
        h.update(t.class().as_str().as_bytes());
        h.update((t.len() as u64).to_le_bytes());
        for p in t.points() {
            h.update(p.frame.to_le_bytes());
            h.update(p.x.to_le_bytes());
            h.update(p.y.to_le_bytes());
        }
    }
    h.finalize().into()
}

const MAGIC: &[u8; 4] = b"DTWM";
const CACHE_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 32;

/// Serializes a matrix: magic, version, `n`, dataset hash, then the strict
/// upper triangle row-major as little-endian `f64`.
pub fn encode_matrix(matrix: &DissimilarityMatrix, hash: &[u8; 32]) -> Vec<u8> {
    let upper = matrix.upper_triangle();
    let mut buf = Vec::with_capacity(HEADER_LEN + upper.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(matrix.len() as u32).to_le_bytes());
    buf.extend_from_slice(hash);
    for v in upper {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

/// Inverse of [`encode_matrix`]; returns the matrix and its stored hash.
pub fn decode_matrix(bytes: &[u8], path: &Path) -> Result<(DissimilarityMatrix, [u8; 32])> {
    let bad = |reason: &str| Error::Cache {
        path: path.to_owned(),
        reason: reason.to_owned(),
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CACHE_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let mut hash = [0u8; 32];
    hash.copy_from_slice(&bytes[10..42]);
    let body = &bytes[HEADER_LEN..];
    let expected = n * n.saturating_sub(1) / 2;
    if body.len() != expected * 8 {
        return Err(bad(&format!(
            "expected {} body bytes for n = {n}, found {}",
            expected * 8,
            body.len()
        )));
    }
    let upper: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let matrix = DissimilarityMatrix::from_upper_triangle(n, &upper).map_err(|e| bad(&e.to_string()))?;
    Ok((matrix, hash))
}

pub fn write_matrix(path: &Path, matrix: &DissimilarityMatrix, hash: &[u8; 32]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_matrix(matrix, hash))
        .map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<(DissimilarityMatrix, [u8; 32])> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
}

/// Cache directory holding matrices keyed by dataset content hash.
#[derive(Debug, Clone)]
pub struct MatrixCache {
    dir: PathBuf,
}

impl MatrixCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, hash: &[u8; 32]) -> PathBuf {
        self.dir.join(format!("dtw-{}.bin", &hex::encode(hash)[..16]))
    }

    /// Loads the matrix for `dataset` if cached, otherwise builds and stores it.
    pub fn load_or_build(&self, dataset: &[Trajectory], workers: usize) -> Result<(DissimilarityMatrix, CacheStatus)> {
        let hash = dataset_hash(dataset);
        let path = self.path_for(&hash);
        if path.exists() {
            match read_matrix(&path) {
                Ok((m, stored)) if stored == hash && m.len() == dataset.len() => {
                    log::debug!("matrix cache hit {}", path.display());
                    return Ok((m, CacheStatus::Hit));
                }
                Ok(_) => log::warn!("stale matrix cache {}, rebuilding", path.display()),
                Err(e) => log::warn!("unreadable matrix cache: {e}; rebuilding"),
            }
        }
        let matrix = build_matrix_with_workers(dataset, workers)?;
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        write_matrix(&path, &matrix, &hash)?;
        Ok((matrix, CacheStatus::Built))
    }
}
