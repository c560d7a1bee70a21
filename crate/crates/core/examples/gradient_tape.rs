//! Builds the training graph of a two-view model on one tape, runs the
//! backward pass and compares a few coordinates with central differences.
//!
//! cargo run --example gradient_tape

use evidfuse::autodiff::{loss_and_grad, LossTerms, Model, ModelShape};
use evidfuse::data::MultiViewSample;

fn main() -> evidfuse::Result<()> {
    let shape = ModelShape {
        num_classes: 2,
        local_dims: vec![4, 4],
        global_dim: None,
        hidden: vec![5],
    };
    let mut model = Model::new(&shape, 7)?;
    let samples = [
        MultiViewSample { id: "a".into(), views: vec![vec![0.3, -1.0, 0.8, 0.1], vec![1.2, 0.4, -0.3, 0.9]], global: None, label: 1 },
        MultiViewSample { id: "b".into(), views: vec![vec![-0.7, 0.2, 0.5, -1.1], vec![0.0, -0.6, 1.4, 0.2]], global: None, label: 0 },
    ];
    let batch: Vec<&MultiViewSample> = samples.iter().collect();
    let lambda = 0.7;
    let out = loss_and_grad(&model, &batch, lambda, LossTerms::Full)?;
    println!("loss {:.6} over {} parameters", out.loss, out.grads.len());

    let params = model.params();
    let h = 1e-5;
    for k in (0..params.len()).step_by(9) {
        let mut p = params.clone();
        p[k] += h;
        model.set_params(&p)?;
        let up = loss_and_grad(&model, &batch, lambda, LossTerms::Full)?.loss;
        p[k] -= 2.0 * h;
        model.set_params(&p)?;
        let down = loss_and_grad(&model, &batch, lambda, LossTerms::Full)?.loss;
        let fd = (up - down) / (2.0 * h);
        println!("param {k:>3}: analytic {:+.8}  numeric {fd:+.8}", out.grads[k]);
    }
    Ok(())
}
