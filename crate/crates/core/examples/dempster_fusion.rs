//! Dempster's rule on a few opinion pairs: disagreement, agreement, the
//! vacuous identity, and a fold over four views.
//!
//! cargo run --example dempster_fusion

use evidfuse::{combine_many, combine_pair, vacuous_opinion, Opinion};

fn show(name: &str, a: &Opinion, b: &Opinion) -> evidfuse::Result<()> {
    let f = combine_pair(a, b)?;
    println!(
        "{name:<12} N = {:.4}  b = {:.4?}  u = {:.4}",
        f.conflicts[0],
        f.combined.beliefs(),
        f.combined.uncertainty()
    );
    Ok(())
}

fn main() -> evidfuse::Result<()> {
    let left = Opinion::new(vec![0.6, 0.2], 0.2)?;
    let right = Opinion::new(vec![0.2, 0.6], 0.2)?;
    let sure = Opinion::new(vec![0.8, 0.1], 0.1)?;
    show("disagree", &left, &right)?;
    show("agree", &sure, &sure)?;
    show("vacuous", &vacuous_opinion(2)?, &left)?;

    // A confident view dominates several hesitant ones.
    let views = vec![
        Opinion::new(vec![0.1, 0.05], 0.85)?,
        Opinion::new(vec![0.05, 0.1], 0.85)?,
        Opinion::new(vec![0.02, 0.9], 0.08)?,
        Opinion::new(vec![0.1, 0.1], 0.8)?,
    ];
    let f = combine_many(&views)?;
    println!(
        "four views   b = {:.4?}  u = {:.4}  per-step N = {:.4?}",
        f.combined.beliefs(),
        f.combined.uncertainty(),
        f.conflicts
    );
    Ok(())
}
