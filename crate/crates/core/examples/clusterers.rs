//! Runs the three base clusterers on the same matrix and prints their groups.
//!
//! `cargo run --release --example clusterers -- [k]`

use trajclust::cluster::{agglomerative, dissim_row_clustering, pam};
use trajclust::dtw::build_matrix;
use trajclust::io::{generate, SyntheticSpec};
use trajclust::Partition;

fn show(name: &str, p: &Partition, ids: &[String]) {
    println!("{name}: {} clusters", p.k_effective());
    for c in p.clusters() {
        println!("  medoid {} size {:3} spread {:.4}", ids[c.medoid], c.len(), c.spread);
    }
}

fn main() -> trajclust::Result<()> {
    let k: usize = std::env::args().nth(1).map_or(4, |s| s.parse().expect("k"));
    let data = generate(&SyntheticSpec::intersection(10, 0.02, 0, 3))?;
    let ids: Vec<String> = data.trajectories.iter().map(|t| t.id().to_owned()).collect();
    let m = build_matrix(&data.trajectories)?;

    show("agglomerative", &agglomerative(&m, k)?, &ids);
    show("pam", &pam(&m, k)?, &ids);
    show("dissim rows", &dissim_row_clustering(&m, k)?, &ids);
    Ok(())
}
