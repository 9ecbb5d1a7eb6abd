//! Trains every scheme on the default synthetic experiment and prints
//! retrieval and alignment metrics per seed.
//!
//! `cargo run --release -p acan --example scheme_comparison -- [seeds...]`

use std::time::Instant;

use acan::data::{generate_synthetic, SynthConfig};
use acan::eval::{evaluate, EvalOptions};
use acan::objectives::Scheme;
use acan::trainer::{train, TrainConfig};

fn main() -> acan::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).map(|s| s.parse().expect("seed")).collect();
    let seeds = if seeds.is_empty() { vec![0, 1, 2] } else { seeds };
    let ds = generate_synthetic(&SynthConfig::default())?;
    println!("scheme seed   mAP     R1      d_inter  uniformity  secs");
    for scheme in [Scheme::None, Scheme::Grl, Scheme::Oce, Scheme::Ace] {
        for &seed in &seeds {
            let start = Instant::now();
            let cfg = TrainConfig { scheme, seed, ..TrainConfig::default() };
            let (net, _) = train(&ds, &cfg)?;
            let r = evaluate(&net, &ds, &EvalOptions::default())?;
            println!(
                "{:<6} {:<6} {:.4}  {:.4}  {:.4}   {:.4}      {:.1}",
                scheme.as_str(),
                seed,
                r.map,
                r.cmc[0],
                r.d_inter_camera,
                r.off_diagonal_uniformity,
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
