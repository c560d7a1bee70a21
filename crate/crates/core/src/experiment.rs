//! Train-and-evaluate runs on generated or loaded multi-view data.

use serde::{Deserialize, Serialize};

use crate::autodiff::{evaluate_model, shape_for, train, Evaluation, Model, TrainConfig, TrainReport};
use crate::data::MultiViewDataset;
use crate::error::{Error, Result};
use crate::metrics::{summarize, MetricsSummary};
use crate::synth::{bayes_accuracy, generate, SynthSpec, ViewSelection};

/// How the global view of each sample is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalView {
    /// Concatenate every local view (the whole region seen at once).
    #[default]
    Concat,
    /// Keep whatever the data provides; generated data has none.
    AsGiven,
}

/// Everything the `train` command needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub train: TrainConfig,
    /// Data to generate; when absent the features come from an input file.
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub global_view: GlobalView,
    #[serde(default = "default_bins")]
    pub ece_bins: usize,
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_bins() -> usize {
    10
}

impl ExperimentConfig {
    /// The standard synthetic benchmark. λ reaches 1 halfway through and
    /// then stays there, so late epochs optimize a fixed objective.
    pub fn benchmark(seed: u64) -> Self {
        Self {
            train: TrainConfig {
                seed,
                anneal_epochs: Some(250),
                ..TrainConfig::default()
            },
            synth: Some(SynthSpec::benchmark(seed)),
            test_fraction: 0.2,
            global_view: GlobalView::Concat,
            ece_bins: 10,
        }
    }

    /// Replaces every seed with `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.train.seed = seed;
        if let Some(s) = &mut self.synth {
            s.seed = seed;
        }
        self
    }
}

/// Result of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub model: Model,
    pub report: TrainReport,
    pub test: Evaluation,
    /// Ids of the held-out samples, in the order of `test`.
    pub test_ids: Vec<String>,
    pub combined: MetricsSummary,
    /// Test metrics of each view network on its own, locals then global.
    pub per_view: Vec<MetricsSummary>,
    /// Bayes-optimal accuracy using every view, for generated data.
    pub bayes_combined: Option<f64>,
}

impl Outcome {
    pub fn num_locals(&self) -> usize {
        self.model.locals.len()
    }
}

/// Builds the dataset described by `config` (or takes `data`), splits it,
/// trains a fresh model and evaluates it on the held-out part.
pub fn run(config: &ExperimentConfig, data: Option<MultiViewDataset>) -> Result<Outcome> {
    let data = match (data, &config.synth) {
        (Some(d), _) => d,
        (None, Some(spec)) => generate(spec)?,
        (None, None) => return Err(Error::Empty("dataset (no input file and no synth spec)")),
    };
    let data = match config.global_view {
        GlobalView::Concat => data.with_concat_global(),
        GlobalView::AsGiven => data,
    };
    let (train_set, test_set) = data.split(config.test_fraction)?;
    if test_set.is_empty() {
        return Err(Error::Empty("test split"));
    }
    let shape = shape_for(&train_set, &config.train.hidden)?;
    let mut model = Model::new(&shape, config.train.seed)?;
    let report = train(&mut model, &train_set, &config.train)?;
    let test = evaluate_model(&model, &test_set)?;
    let test_ids = test_set.samples.iter().map(|s| s.id.clone()).collect();
    let combined = summarize(&test.combined, config.ece_bins)?;
    let per_view = test
        .per_view
        .iter()
        .map(|r| summarize(r, config.ece_bins))
        .collect::<Result<Vec<_>>>()?;
    let bayes_combined = match &config.synth {
        Some(spec) => Some(bayes_accuracy(spec, &ViewSelection::All)?),
        None => None,
    };
    Ok(Outcome {
        model,
        report,
        test,
        test_ids,
        combined,
        per_view,
        bayes_combined,
    })
}
