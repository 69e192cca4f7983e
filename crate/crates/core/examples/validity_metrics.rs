//! Validity indices for each k of an agglomerative sweep.
//!
//! `cargo run --release --example validity_metrics`

use trajclust::cluster::agglomerative;
use trajclust::dtw::build_matrix;
use trajclust::io::{generate, SyntheticSpec};
use trajclust::ValidityReport;

fn main() -> trajclust::Result<()> {
    let data = generate(&SyntheticSpec::intersection(15, 0.02, 0, 11))?;
    let m = build_matrix(&data.trajectories)?;
    println!("   k  DB orig.   DB mod.      Slh.      Spr.");
    for k in 2..=8 {
        let r = ValidityReport::compute(&agglomerative(&m, k)?, &m)?;
        println!(
            "{k:4} {:9.4} {:9.4} {:9.4} {:9.4}",
            r.db_original, r.db_modified, r.silhouette, r.spread_on_cluster
        );
    }
    Ok(())
}
