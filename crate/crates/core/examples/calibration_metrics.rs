//! Accuracy, AUC and ECE on a synthetic set of predictions whose stated
//! confidence is right on average, and on the same set made overconfident.
//!
//! cargo run --example calibration_metrics

use evidfuse::metrics::{reliability_bins, summarize, PredictionRecord};
use evidfuse::ProbVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn records(sharpen: f64, rng: &mut ChaCha8Rng) -> evidfuse::Result<Vec<PredictionRecord>> {
    (0..10_000)
        .map(|_| {
            let p1: f64 = rng.random_range(0.0..1.0);
            let label = usize::from(rng.random_range(0.0..1.0) < p1);
            let q = if p1 > 0.5 { p1.powf(1.0 / sharpen) } else { 1.0 - (1.0 - p1).powf(1.0 / sharpen) };
            PredictionRecord::new(ProbVector::new(vec![1.0 - q, q])?, label, 0.0)
        })
        .collect()
}

fn main() -> evidfuse::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, sharpen) in [("calibrated", 1.0), ("overconfident", 4.0)] {
        let r = records(sharpen, &mut rng)?;
        let m = summarize(&r, 10)?;
        println!("{name:<14} acc {:.4}  auc {:.4}  ece {:.4}", m.acc, m.auc.unwrap_or(f64::NAN), m.ece);
        for b in reliability_bins(&r, 10)?.iter().filter(|b| b.count > 0) {
            println!("   ({:.1}, {:.1}]  n {:>5}  conf {:.3}  acc {:.3}", b.lower, b.upper, b.count, b.mean_confidence, b.accuracy);
        }
    }
    Ok(())
}
