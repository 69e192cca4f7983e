//! Two maneuvers share most of their path and part at the end. Plain
//! agglomerative clustering mixes them; endpoint refinement separates them.
//!
//! `cargo run --release --example refine_shared_path`

use trajclust::dtw::build_matrix;
use trajclust::io::{generate, GroundTruth, SyntheticSpec};
use trajclust::pipeline::{run_once, Method};
use trajclust::refine::project;
use trajclust::Bandwidth;

fn main() -> trajclust::Result<()> {
    let data = generate(&SyntheticSpec::shared_path(20, 0.01, 1, 7))?;
    let m = build_matrix(&data.trajectories)?;

    for method in [Method::Agglo, Method::A1ms, Method::A2ms] {
        let out = run_once(&data.trajectories, &m, method, 2, 0.6, Bandwidth::default())?;
        println!(
            "{}: {} clusters, {} rejected",
            method.label(),
            out.partition.k_effective(),
            out.partition.n_rejected()
        );
        for c in out.partition.clusters() {
            let through = c
                .members
                .iter()
                .filter(|&&i| data.labels[i] == GroundTruth::Template(0))
                .count();
            println!("  size {:2}: {through} through, {} branch", c.len(), c.len() - through);
        }
    }

    // Projection of a through-path onto the branch covers only the shared part.
    let through = data.trajectories[0].positions();
    let branch = data.trajectories[20].positions();
    let p = project(&through, &branch)?;
    println!("trace fraction of through onto branch: {:.3}", p.trace_fraction);
    Ok(())
}
