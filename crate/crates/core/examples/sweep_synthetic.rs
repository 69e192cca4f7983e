//! Sweeps every method over a synthetic intersection and scores each best
//! partition against the ground truth.
//!
//! `cargo run --release --example sweep_synthetic -- [per_template] [sigma] [outliers] [seed]`

use std::collections::HashMap;

use trajclust::dtw::build_matrix;
use trajclust::io::{generate, GroundTruth, SyntheticSpec};
use trajclust::pipeline::{sweep, Method, SweepConfig};
use trajclust::Partition;

fn purity(p: &Partition, truth: &[GroundTruth]) -> f64 {
    let mut hit = 0;
    for c in p.clusters() {
        let mut counts: HashMap<GroundTruth, usize> = HashMap::new();
        for &m in &c.members {
            *counts.entry(truth[m]).or_default() += 1;
        }
        hit += counts.values().max().copied().unwrap_or(0);
    }
    hit as f64 / p.n_clustered().max(1) as f64
}

fn main() -> trajclust::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_owned());
    let per_template: usize = arg(0, "30").parse().expect("per_template");
    let sigma: f64 = arg(1, "0.02").parse().expect("sigma");
    let outliers: usize = arg(2, "5").parse().expect("outliers");
    let seed: u64 = arg(3, "42").parse().expect("seed");

    let data = generate(&SyntheticSpec::intersection(per_template, sigma, outliers, seed))?;
    let matrix = build_matrix(&data.trajectories)?;
    println!("{} trajectories", data.trajectories.len());
    for method in Method::ALL {
        let result = sweep(&data.trajectories, &matrix, &SweepConfig::new(method, 2, 8))?;
        for e in &result.per_k {
            println!(
                "  {:6} k={} k_eff={} rejected={} spread={}",
                method.label(),
                e.k_nominal,
                e.k_effective,
                e.partition.n_rejected(),
                e.report.map_or("NA".into(), |r| format!("{:.4}", r.spread_on_cluster)),
            );
        }
        let best = result.best_partition();
        println!(
            "{:6} best k={} clusters={} rejected={} purity={:.3}",
            method.label(),
            result.best_k,
            best.k_effective(),
            best.n_rejected(),
            purity(best, &data.labels)
        );
    }
    Ok(())
}
