//! Trains the fused evidential model on the three-view synthetic benchmark
//! (one pure-noise view, two informative ones) for several seeds and prints
//! test metrics per view and for the fused opinion.
//!
//! cargo run --release --example synthetic_benchmark -- [seeds]

use std::time::Instant;

use evidfuse::experiment::{run, ExperimentConfig};

fn main() -> evidfuse::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for seed in 0..seeds {
        let t = Instant::now();
        let out = run(&ExperimentConfig::benchmark(seed), None)?;
        let names = ["noise", "view_2", "view_3", "global"];
        print!("seed {seed}: fused acc {:.4} ece {:.4} u {:.3} |", out.combined.acc, out.combined.ece, out.combined.mean_uncertainty);
        for (name, m) in names.iter().zip(&out.per_view) {
            print!(" {name} acc {:.3} u {:.3} |", m.acc, m.mean_uncertainty);
        }
        println!(" bayes {:.5} ({:.1}s)", out.bayes_combined.unwrap_or(f64::NAN), t.elapsed().as_secs_f64());
    }
    Ok(())
}
