//! DTW between two hand-made paths, plus the full accumulated-cost table.
//!
//! `cargo run --example dtw_distance`

use trajclust::dtw::{dtw_full_table, dtw_points};
use trajclust::Point2;

fn main() -> trajclust::Result<()> {
    let a: Vec<Point2> = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
        .into_iter()
        .map(Point2::from)
        .collect();
    // Same road, sampled at a different rate and offset sideways.
    let b: Vec<Point2> = [(0.0, 0.1), (0.5, 0.1), (1.0, 0.1), (1.5, 0.1), (3.0, 0.1)]
        .into_iter()
        .map(Point2::from)
        .collect();

    println!("dtw(a, b) = {:.4}", dtw_points(&a, &b)?);
    println!("dtw(b, a) = {:.4}", dtw_points(&b, &a)?);
    println!("accumulated cost table:");
    for row in dtw_full_table(&a, &b)? {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:6.3}")).collect();
        println!("  {}", cells.join(" "));
    }
    Ok(())
}
