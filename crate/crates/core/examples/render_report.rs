//! Clusters a synthetic intersection with A2MS and renders the SVG report.
//!
//! `cargo run --release --example render_report -- [out_dir]`

use trajclust::dtw::build_matrix;
use trajclust::io::{generate, SyntheticSpec};
use trajclust::pipeline::{sweep, Method, SweepConfig};
use trajclust::report::{render_report, ReportSpec};

fn main() -> trajclust::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/report".into());
    let data = generate(&SyntheticSpec::intersection(20, 0.02, 3, 5))?;
    let (ds, params) = trajclust::normalize(&data.trajectories)?;
    let m = build_matrix(&ds)?;
    let r = sweep(&ds, &m, &SweepConfig::new(Method::A2ms, 2, 8))?;
    let files = render_report(r.best_partition(), &ds, Some(&params), &ReportSpec::new(&out))?;
    println!("best k = {}, wrote {} files:", r.best_k, files.len());
    for f in files {
        println!("  {}", f.display());
    }
    Ok(())
}
