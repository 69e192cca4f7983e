//! Loads inD-style recordings and prints per-class counts and skipped tracks.
//! Defaults to the small fixture shipped with the tests.
//!
//! `cargo run --example load_ind -- [dir] [first-last]`

use std::path::PathBuf;

use trajclust::io::{load_recordings, LoadOptions, RecordingBundle};

fn main() -> trajclust::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ind"));
    let range = args.next().unwrap_or_else(|| "0-1".into());
    let (lo, hi) = range.split_once('-').unwrap_or((&range, &range));
    let (lo, hi): (u32, u32) = (lo.parse().expect("first"), hi.parse().expect("last"));

    let bundle = RecordingBundle::from_dir(&dir, "ind", lo..=hi)?;
    let out = load_recordings(&bundle, &LoadOptions::default())?;
    let c = &out.counts;
    println!(
        "{} trajectories: {} cars, {} pedestrians, {} bicycles, {} other",
        out.trajectories.len(),
        c.car,
        c.pedestrian,
        c.bicycle,
        c.other
    );
    for d in &out.diagnostics {
        println!(
            "skipped recording {} track {}: {}",
            d.recording_id, d.track_id, d.reason
        );
    }
    Ok(())
}
