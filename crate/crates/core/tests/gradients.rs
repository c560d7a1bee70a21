//! Tape gradients against finite differences and the scalar loss functions.

mod common;

use approx::assert_relative_eq;
use common::{gradient_probe, toy_batch, toy_shape};
use evidfuse::autodiff::{loss_and_grad, LossTerms, Model};
use evidfuse::data::MultiViewSample;
use evidfuse::loss::{integrated_ce, overall_loss, OneHotLabel};
use evidfuse::DirichletParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn twenty_directional_probes_agree() {
    for seed in 0..20 {
        let p = gradient_probe(seed, 1e-5);
        assert!(p.rel_err() < 1e-4, "seed {seed}: {} vs {}", p.analytic, p.numeric);
    }
}

#[test]
fn every_coordinate_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut model = Model::new(&toy_shape(), 11).unwrap();
    let samples = toy_batch(&mut rng, 4);
    let batch: Vec<&MultiViewSample> = samples.iter().collect();
    let out = loss_and_grad(&model, &batch, 0.6, LossTerms::Full).unwrap();
    let theta = model.params();
    let h = 1e-5;
    for k in 0..theta.len() {
        let mut p = theta.clone();
        p[k] = theta[k] + h;
        model.set_params(&p).unwrap();
        let up = loss_and_grad(&model, &batch, 0.6, LossTerms::Full).unwrap().loss;
        p[k] = theta[k] - h;
        model.set_params(&p).unwrap();
        let down = loss_and_grad(&model, &batch, 0.6, LossTerms::Full).unwrap().loss;
        let fd = (up - down) / (2.0 * h);
        let g = out.grads[k];
        assert!((g - fd).abs() <= 1e-4 * g.abs().max(fd.abs()) + 1e-9, "param {k}: {g} vs {fd}");
    }
}

/// Per-sample Dirichlets from the inference path.
fn dirichlets(model: &Model, s: &MultiViewSample) -> (Vec<DirichletParams>, DirichletParams, DirichletParams) {
    let p = model.predict(s).unwrap();
    let mut views: Vec<DirichletParams> = p.view_opinions.iter().map(|o| o.to_dirichlet()).collect();
    let global = views.pop().unwrap();
    (views, global, p.fusion.combined.to_dirichlet())
}

#[test]
fn tape_loss_equals_overall_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = Model::new(&toy_shape(), 3).unwrap();
    let samples = toy_batch(&mut rng, 5);
    let batch: Vec<&MultiViewSample> = samples.iter().collect();
    for lambda in [0.0, 0.3, 1.0] {
        let tape = loss_and_grad(&model, &batch, lambda, LossTerms::Full).unwrap().loss;
        let direct: f64 = samples
            .iter()
            .map(|s| {
                let (views, global, combined) = dirichlets(&model, s);
                overall_loss(&views, &global, &combined, &OneHotLabel::new(s.label, 2).unwrap(), lambda).unwrap()
            })
            .sum::<f64>()
            / samples.len() as f64;
        assert_relative_eq!(tape, direct, max_relative = 1e-12);
    }
}

#[test]
fn zero_lambda_is_pure_ice() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = Model::new(&toy_shape(), 4).unwrap();
    let samples = toy_batch(&mut rng, 5);
    let batch: Vec<&MultiViewSample> = samples.iter().collect();
    let tape = loss_and_grad(&model, &batch, 0.0, LossTerms::Full).unwrap().loss;
    let ice: f64 = samples
        .iter()
        .map(|s| {
            let y = OneHotLabel::new(s.label, 2).unwrap();
            let (mut all, global, combined) = dirichlets(&model, s);
            all.push(global);
            all.push(combined);
            all.iter().map(|a| integrated_ce(a, &y).unwrap()).sum::<f64>()
        })
        .sum::<f64>()
        / samples.len() as f64;
    assert_relative_eq!(tape, ice, max_relative = 1e-12);
}

#[test]
fn evidence_is_strictly_positive_after_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = Model::new(&toy_shape(), 5).unwrap();
    for s in toy_batch(&mut rng, 20) {
        for op in model.predict(&s).unwrap().view_opinions {
            assert!(op.to_dirichlet().alpha().iter().all(|&a| a >= 1.0 && a.is_finite()));
        }
    }
}
