//! Shifted patch tokenization of a random image and locality self-attention
//! at several temperatures. Lower temperatures give sharper rows.
//!
//! cargo run --example attention_kernels

use evidfuse::attention::{lsa_attention, mean_row_entropy, spt_raw_tokens, ImageTensor, LinearMap, LsaParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> evidfuse::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let img = ImageTensor::new(32, 32, 1, (0..32 * 32).map(|_| rng.random_range(0.0..1.0)).collect())?;
    let raw = spt_raw_tokens(&img, 8)?;
    println!("SPT: {} tokens of raw width {}", raw.num_tokens, raw.dim);
    let tokens = LinearMap::random(raw.dim, 16, &mut rng).apply(&raw)?;
    let base = LsaParams::random(16, 16, 16, &mut rng);
    let n = tokens.num_tokens;
    for tau in [16.0, 4.0, 1.0, 0.25] {
        let out = lsa_attention(&tokens, &base.clone().with_temperature(tau))?;
        let diag = (0..n).map(|i| out.attention[i * n + i]).fold(0.0, f64::max);
        println!("tau {tau:>5}: mean row entropy {:.4} nats, max diagonal weight {diag:e}", mean_row_entropy(&out.attention, n));
    }
    Ok(())
}
