//! Flat-kernel mean-shift on three 2-D blobs, with the automatic bandwidth
//! and a few fixed ones.
//!
//! `cargo run --example mean_shift_modes`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use trajclust::cluster::{mean_shift, Bandwidth};

fn main() -> trajclust::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.03).unwrap();
    let centers = [[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]];
    let points: Vec<[f64; 2]> = centers
        .iter()
        .flat_map(|c| {
            (0..40)
                .map(|_| [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)])
                .collect::<Vec<_>>()
        })
        .collect();

    for bw in [
        Bandwidth::default(),
        Bandwidth::Fixed(0.05),
        Bandwidth::Fixed(0.3),
        Bandwidth::Fixed(1.0),
    ] {
        let r = mean_shift(&points, bw)?;
        println!("{bw}: bandwidth {:.4}, {} modes", r.bandwidth, r.n_modes());
        for m in &r.modes {
            println!("  ({:.3}, {:.3})", m[0], m[1]);
        }
    }
    Ok(())
}
