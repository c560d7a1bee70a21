//! The integrated cross-entropy, the KL penalty on misleading evidence, and
//! how the annealed weight λ mixes them.
//!
//! cargo run --example evidential_loss

use evidfuse::loss::{integrated_ce, kl_to_uniform, masked_alpha, view_loss, AnnealSchedule, OneHotLabel};
use evidfuse::DirichletParams;

fn main() -> evidfuse::Result<()> {
    let y = OneHotLabel::new(0, 2)?;
    let cases = [vec![1.0, 1.0], vec![9.0, 1.0], vec![1.0, 9.0], vec![9.0, 5.0]];
    let schedule = AnnealSchedule::new(4);
    println!("{:>12} {:>8} {:>8} loss at lambda = 0, .25, .5, .75, 1", "alpha", "ICE", "KL");
    for a in cases {
        let alpha = DirichletParams::new(a)?;
        let kl = kl_to_uniform(&masked_alpha(&alpha, &y)?);
        let losses = (0..=4)
            .map(|s| view_loss(&alpha, &y, schedule.lambda_at(s)))
            .collect::<evidfuse::Result<Vec<_>>>()?;
        println!("{:>12} {:>8.4} {:>8.4} {:.4?}", format!("{:?}", alpha.alpha()), integrated_ce(&alpha, &y)?, kl, losses);
    }
    Ok(())
}
