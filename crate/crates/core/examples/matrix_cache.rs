//! Builds the pairwise DTW matrix for a synthetic dataset and stores it in an
//! on-disk cache keyed by the dataset contents. The second call is a hit.
//!
//! `cargo run --release --example matrix_cache -- [cache_dir]`

use std::time::Instant;

use trajclust::dtw::MatrixCache;
use trajclust::io::{generate, SyntheticSpec};

fn main() -> trajclust::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "out/cache".into());
    let data = generate(&SyntheticSpec::intersection(25, 0.02, 3, 1))?;
    let cache = MatrixCache::new(&dir);

    for attempt in 1..=2 {
        let start = Instant::now();
        let (m, status) = cache.load_or_build(&data.trajectories, 0)?;
        println!(
            "attempt {attempt}: {status:?} {}x{} in {:.2?}, d(0, 1) = {:.4}",
            m.len(),
            m.len(),
            start.elapsed(),
            m.get(0, 1)
        );
    }
    let hash = trajclust::dtw::dataset_hash(&data.trajectories);
    println!("cache file: {}", cache.path_for(&hash).display());
    Ok(())
}
