//! End-to-end training of the per-view evidential networks through the
//! fusion rule.
//!
//! Each mini-batch builds one tape: every view network produces evidence,
//! evidence becomes Dirichlet parameters and opinions, the opinions are
//! fused left to right (locals, then global), and the loss is the sum of the
//! per-view losses plus the loss of the fused opinion. Gradients flow through
//! the fusion expressions, normalization factor included.

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{Model, ModelShape};
use super::optim::{poly_lr, Adam};
use super::tape::{GradTape, NodeId, Tensor};
use crate::data::{MultiViewDataset, MultiViewSample};
use crate::error::{Error, Result};
use crate::loss::AnnealSchedule;
use crate::metrics::PredictionRecord;
use crate::opinion::ProbVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub poly_power: f64,
    pub seed: u64,
    pub batch_size: usize,
    /// Widths of the hidden rectifier layers of every view network.
    pub hidden: Vec<usize>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Epochs over which λ ramps from 0 to `lambda_max`; defaults to `epochs`.
    pub anneal_epochs: Option<usize>,
    pub lambda_max: f64,
    /// Epochs of per-view training with λ = 0 and no fused term before the
    /// end-to-end phase.
    pub warmup_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            epochs: 500,
            poly_power: 0.9,
            seed: 0,
            batch_size: 32,
            hidden: vec![16],
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            anneal_epochs: None,
            lambda_max: 1.0,
            warmup_epochs: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs", "must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.lambda_max) {
            return bad("lambda_max", "must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta", "Adam betas must lie in [0, 1)");
        }
        if !(self.poly_power >= 0.0) {
            return bad("poly_power", "must be non-negative");
        }
        Ok(())
    }

    pub fn anneal_schedule(&self) -> AnnealSchedule {
        AnnealSchedule::new(self.anneal_epochs.unwrap_or(self.epochs))
    }
}

/// Which loss terms enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTerms {
    /// Local views, global view and the fused opinion.
    Full,
    /// Per-view terms only; used for warm-up.
    ViewsOnly,
}

/// Forward values and gradients for one batch.
#[derive(Debug, Clone)]
pub struct BatchOutput {
    /// Mean over the batch of the summed loss terms.
    pub loss: f64,
    /// Gradient in [`Model::params`] order.
    pub grads: Vec<f64>,
    /// Dirichlet parameters of the fused opinion, one row per sample.
    pub combined_alpha: Tensor,
    /// Uncertainty of every view network (outer) for every sample (inner).
    pub view_uncertainty: Vec<Vec<f64>>,
}

/// Loss and gradient of a batch.
pub fn loss_and_grad(
    model: &Model,
    batch: &[&MultiViewSample],
    lambda: f64,
    terms: LossTerms,
) -> Result<BatchOutput> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{lambda} outside [0, 1]"),
        });
    }
    for s in batch {
        model.check_sample(s)?;
    }
    let labels: Vec<usize> = batch.iter().map(|s| s.label).collect();
    let c = model.num_classes;

    let mut tape = GradTape::new();
    let mut param_nodes: Vec<NodeId> = Vec::new();
    let mut loss_terms = Vec::new();
    let mut opinions = Vec::new();

    for (k, net) in model.nets().enumerate() {
        let rows: Vec<&[f64]> = batch
            .iter()
            .map(|s| model.inputs(s).nth(k).expect("checked view count"))
            .collect();
        if let Some(r) = rows.iter().find(|r| r.len() != net.input_dim()) {
            return Err(Error::Dimension {
                context: "view features",
                expected: net.input_dim(),
                actual: r.len(),
            });
        }
        let x = tape.leaf(Tensor::from_rows(&rows)?)?;
        let (evidence, params) = net.forward_tape(&mut tape, x)?;
        param_nodes.extend(params);
        let alpha = tape.add_scalar(evidence, 1.0)?;
        loss_terms.push(tape.evidential_loss(alpha, &labels, lambda)?);
        opinions.push(tape.to_opinion(alpha)?);
    }

    let mut fused = opinions[0];
    for &o in &opinions[1..] {
        fused = tape.dempster(fused, o)?;
    }
    let combined_alpha = tape.opinion_to_alpha(fused)?;
    if terms == LossTerms::Full {
        loss_terms.push(tape.evidential_loss(combined_alpha, &labels, lambda)?);
    }
    let total = tape.sum(&loss_terms)?;
    let grads = tape.backward(total);

    let mut flat = Vec::with_capacity(model.param_count());
    for id in param_nodes {
        match grads.get(id) {
            Some(g) => flat.extend_from_slice(&g.data),
            None => flat.extend(std::iter::repeat_n(0.0, tape.value(id).data.len())),
        }
    }
    let view_uncertainty = opinions
        .iter()
        .map(|&o| {
            let v = tape.value(o);
            (0..v.rows).map(|i| v.row(i)[c]).collect()
        })
        .collect();
    Ok(BatchOutput {
        loss: tape.value(total).scalar(),
        grads: flat,
        combined_alpha: tape.value(combined_alpha).clone(),
        view_uncertainty,
    })
}

/// One line of the training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    /// Sample-weighted mean batch loss.
    pub loss: f64,
    /// Accuracy of the fused prediction on the batches seen this epoch.
    pub acc: f64,
    /// Mean uncertainty per view network, locals then global.
    pub mean_uncertainty: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub warmup: Vec<EpochRecord>,
    pub history: Vec<EpochRecord>,
}

impl TrainReport {
    /// `epoch,loss,acc,mean_u_view_1,...` with the global column last when
    /// present.
    pub fn history_csv(&self, num_locals: usize) -> String {
        let width = self.history.first().map_or(0, |r| r.mean_uncertainty.len());
        let mut out = String::from("epoch,loss,acc");
        for k in 0..width {
            if k < num_locals {
                out.push_str(&format!(",mean_u_view_{}", k + 1));
            } else {
                out.push_str(",mean_u_global");
            }
        }
        out.push('\n');
        for r in &self.history {
            out.push_str(&format!("{},{},{}", r.epoch, r.loss, r.acc));
            for u in &r.mean_uncertainty {
                out.push_str(&format!(",{u}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Shape of a model matching a dataset.
pub fn shape_for(ds: &MultiViewDataset, hidden: &[usize]) -> Result<ModelShape> {
    let first = ds.samples.first().ok_or(Error::Empty("dataset"))?;
    Ok(ModelShape {
        num_classes: ds.num_classes,
        local_dims: first.views.iter().map(Vec::len).collect(),
        global_dim: first.global.as_ref().map(Vec::len),
        hidden: hidden.to_vec(),
    })
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn run_epoch(
    model: &mut Model,
    adam: &mut Adam,
    data: &MultiViewDataset,
    order: &[usize],
    config: &TrainConfig,
    epoch: usize,
    lambda: f64,
    lr: f64,
    terms: LossTerms,
) -> Result<EpochRecord> {
    let mut params = model.params();
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    let mut u_sum = vec![0.0; model.num_nets()];
    for chunk in order.chunks(config.batch_size) {
        let batch: Vec<&MultiViewSample> = chunk.iter().map(|&i| &data.samples[i]).collect();
        let out = loss_and_grad(model, &batch, lambda, terms)?;
        if !out.loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: out.loss,
            });
        }
        loss_sum += out.loss * batch.len() as f64;
        for (i, s) in batch.iter().enumerate() {
            if argmax(out.combined_alpha.row(i)) == s.label {
                correct += 1;
            }
        }
        for (acc, us) in u_sum.iter_mut().zip(&out.view_uncertainty) {
            *acc += us.iter().sum::<f64>();
        }
        adam.step(&mut params, &out.grads, lr);
        model.set_params(&params)?;
    }
    let n = order.len() as f64;
    Ok(EpochRecord {
        epoch,
        lambda,
        learning_rate: lr,
        loss: loss_sum / n,
        acc: correct as f64 / n,
        mean_uncertainty: u_sum.into_iter().map(|u| u / n).collect(),
    })
}

/// Trains `model` in place with Adam, a polynomial learning-rate decay and a
/// linear λ ramp (both stepped once per epoch).
pub fn train(model: &mut Model, data: &MultiViewDataset, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if data.num_classes != model.num_classes {
        return Err(Error::ClassMismatch {
            expected: model.num_classes,
            actual: data.num_classes,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..data.len()).collect();

    let mut warmup = Vec::with_capacity(config.warmup_epochs);
    let mut adam = Adam::new(model.param_count(), config.beta1, config.beta2, config.epsilon);
    for epoch in 0..config.warmup_epochs {
        order.shuffle(&mut rng);
        let lr = poly_lr(config.learning_rate, epoch, config.warmup_epochs, config.poly_power);
        let rec = run_epoch(model, &mut adam, data, &order, config, epoch, 0.0, lr, LossTerms::ViewsOnly)?;
        debug!("warm-up epoch {epoch}: loss {:.5}", rec.loss);
        warmup.push(rec);
    }

    let mut adam = Adam::new(model.param_count(), config.beta1, config.beta2, config.epsilon);
    let mut schedule = config.anneal_schedule();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let lambda = config.lambda_max * schedule.lambda();
        let lr = poly_lr(config.learning_rate, epoch, config.epochs, config.poly_power);
        let rec = run_epoch(model, &mut adam, data, &order, config, epoch, lambda, lr, LossTerms::Full)?;
        debug!(
            "epoch {epoch}: λ {lambda:.3} lr {lr:.2e} loss {:.5} acc {:.4}",
            rec.loss, rec.acc
        );
        history.push(rec);
        schedule.advance();
    }
    Ok(TrainReport { warmup, history })
}

/// Fused and per-view predictions for every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub combined: Vec<PredictionRecord>,
    /// One record list per view network, locals then global.
    pub per_view: Vec<Vec<PredictionRecord>>,
}

pub fn evaluate_model(model: &Model, data: &MultiViewDataset) -> Result<Evaluation> {
    let mut combined = Vec::with_capacity(data.len());
    let mut per_view = vec![Vec::with_capacity(data.len()); model.num_nets()];
    for s in &data.samples {
        let p = model.predict(s)?;
        combined.push(PredictionRecord::new(
            p.probs,
            s.label,
            p.fusion.combined.uncertainty(),
        )?);
        for (records, op) in per_view.iter_mut().zip(&p.view_opinions) {
            let probs: ProbVector = crate::opinion::expected_probabilities(&op.to_dirichlet());
            records.push(PredictionRecord::new(probs, s.label, op.uncertainty())?);
        }
    }
    Ok(Evaluation { combined, per_view })
}
