//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use evidfuse::autodiff::{loss_and_grad, LossTerms, Model, ModelShape};
use evidfuse::data::MultiViewSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Two local views of four features, the concatenated global view, two
/// classes and one hidden layer.
pub fn toy_shape() -> ModelShape {
    ModelShape {
        num_classes: 2,
        local_dims: vec![4, 4],
        global_dim: Some(8),
        hidden: vec![6],
    }
}

pub fn toy_batch(rng: &mut impl Rng, n: usize) -> Vec<MultiViewSample> {
    (0..n)
        .map(|i| {
            let views: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            MultiViewSample {
                id: format!("s{i}"),
                views,
                global: None,
                label: rng.random_range(0..2),
            }
            .with_concat_global()
        })
        .collect()
}

/// Result of one central-difference probe along a random direction.
pub struct Probe {
    pub analytic: f64,
    pub numeric: f64,
}

impl Probe {
    pub fn rel_err(&self) -> f64 {
        let scale = self.analytic.abs().max(self.numeric.abs()).max(1e-12);
        (self.analytic - self.numeric).abs() / scale
    }
}

/// Directional derivative of the batch loss along a random unit direction,
/// from the tape and from a central difference with step `h`.
pub fn gradient_probe(seed: u64, h: f64) -> Probe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::new(&toy_shape(), seed).unwrap();
    let samples = toy_batch(&mut rng, 6);
    let batch: Vec<&MultiViewSample> = samples.iter().collect();
    let lambda: f64 = rng.random_range(0.0..1.0);

    let theta = model.params();
    let mut dir: Vec<f64> = (0..theta.len()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|d| *d /= norm);

    let out = loss_and_grad(&model, &batch, lambda, LossTerms::Full).unwrap();
    let analytic: f64 = out.grads.iter().zip(&dir).map(|(g, d)| g * d).sum();
    let mut at = |sign: f64| {
        let p: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t + sign * h * d).collect();
        model.set_params(&p).unwrap();
        loss_and_grad(&model, &batch, lambda, LossTerms::Full).unwrap().loss
    };
    let numeric = (at(1.0) - at(-1.0)) / (2.0 * h);
    Probe { analytic, numeric }
}
