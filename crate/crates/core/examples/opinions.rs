//! Evidence, Dirichlet parameters and opinions for a three-class problem.
//!
//! cargo run --example opinions

use evidfuse::{evidence_to_opinion, expected_probabilities, opinion_to_dirichlet, vacuous_opinion, Evidence};

fn main() -> evidfuse::Result<()> {
    for e in [vec![0.0, 0.0, 0.0], vec![3.0, 1.0, 0.0], vec![40.0, 2.0, 1.0], vec![5.0, 5.0, 5.0]] {
        let ev = Evidence::new(e)?;
        let op = evidence_to_opinion(&ev);
        let alpha = ev.to_dirichlet();
        let p = expected_probabilities(&alpha);
        println!(
            "e = {:?}\n  alpha = {:?}  S = {}\n  b = {:.4?}  u = {:.4}\n  E[p] = {:.4?}",
            ev.values(),
            alpha.alpha(),
            alpha.strength(),
            op.beliefs(),
            op.uncertainty(),
            p.probs()
        );
        // The opinion carries the whole Dirichlet.
        assert_eq!(opinion_to_dirichlet(&op, 3)?.num_classes(), 3);
    }
    let v = vacuous_opinion(3)?;
    println!("vacuous: b = {:?}, u = {}", v.beliefs(), v.uncertainty());
    println!("negative evidence: {}", Evidence::new(vec![1.0, -0.5]).unwrap_err());
    Ok(())
}
