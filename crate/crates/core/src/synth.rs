//! Gaussian multi-view datasets with known Bayes-optimal accuracy.
//!
//! In view `k` every feature of a class-`c` sample is drawn from
//! `N(m_c Δ_k, σ_k²)` with `m_c = c - (C-1)/2`, so the class means lie on
//! the diagonal direction and neighbouring classes are `Δ_k √d` apart. A view
//! with `Δ_k = 0` carries no label information.
//!
//! Labels come from ChaCha stream 0 and view `k` from stream `k + 1`, so
//! appending a view leaves the earlier views' features unchanged.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{MultiViewDataset, MultiViewSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub features_per_view: usize,
    /// Class separation `Δ_k` of each view; its length is the view count.
    pub separation: Vec<f64>,
    /// Noise standard deviation `σ_k` of each view.
    pub noise_std: Vec<f64>,
    pub num_samples: usize,
    pub seed: u64,
}

impl SynthSpec {
    /// The two-class benchmark: one pure-noise view and two views separated
    /// by two standard deviations per feature.
    pub fn benchmark(seed: u64) -> Self {
        Self {
            num_classes: 2,
            features_per_view: 8,
            separation: vec![0.0, 2.0, 2.0],
            noise_std: vec![1.0, 1.0, 1.0],
            num_samples: 2000,
            seed,
        }
    }

    pub fn num_views(&self) -> usize {
        self.separation.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.num_classes < 2 {
            return bad("num_classes", "need at least 2".into());
        }
        if self.features_per_view == 0 {
            return bad("features_per_view", "must be positive".into());
        }
        if self.separation.is_empty() {
            return bad("separation", "need at least one view".into());
        }
        if self.noise_std.len() != self.separation.len() {
            return bad(
                "noise_std",
                format!(
                    "{} entries for {} views",
                    self.noise_std.len(),
                    self.separation.len()
                ),
            );
        }
        if self.noise_std.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("noise_std", "every σ must be positive and finite".into());
        }
        if self.separation.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return bad("separation", "every Δ must be finite and non-negative".into());
        }
        if self.num_samples == 0 {
            return bad("num_samples", "must be positive".into());
        }
        Ok(())
    }

    fn class_offset(&self, class: usize) -> f64 {
        class as f64 - (self.num_classes as f64 - 1.0) / 2.0
    }
}

pub fn generate(spec: &SynthSpec) -> Result<MultiViewDataset> {
    spec.validate()?;
    let stream = |s: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(s);
        rng
    };
    let mut label_rng = stream(0);
    let labels: Vec<usize> = (0..spec.num_samples)
        .map(|_| label_rng.random_range(0..spec.num_classes))
        .collect();

    let width = spec.num_samples.to_string().len();
    let mut samples: Vec<MultiViewSample> = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| MultiViewSample {
            id: format!("s{i:0width$}"),
            views: Vec::with_capacity(spec.num_views()),
            global: None,
            label,
        })
        .collect();

    for k in 0..spec.num_views() {
        let mut rng = stream(k as u64 + 1);
        let (delta, sigma) = (spec.separation[k], spec.noise_std[k]);
        for s in &mut samples {
            let mean = spec.class_offset(s.label) * delta;
            let x = (0..spec.features_per_view)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    mean + sigma * z
                })
                .collect();
            s.views.push(x);
        }
    }
    Ok(MultiViewDataset {
        num_classes: spec.num_classes,
        samples,
    })
}

/// Which views the Bayes classifier may look at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewSelection {
    View(usize),
    Views(Vec<usize>),
    All,
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Bayes-optimal accuracy of the selected views under equal class priors.
///
/// The optimal statistic is one-dimensional with neighbouring classes
/// `s = sqrt(Σ_k d Δ_k² / σ_k²)` standard deviations apart. The two outer
/// classes err on one side and the inner classes on both:
///
/// ```text
/// acc = [2 Φ(s/2) + (C - 2)(2 Φ(s/2) - 1)] / C
/// ```
pub fn bayes_accuracy(spec: &SynthSpec, views: &ViewSelection) -> Result<f64> {
    spec.validate()?;
    let selected: Vec<usize> = match views {
        ViewSelection::View(k) => vec![*k],
        ViewSelection::Views(ks) => ks.clone(),
        ViewSelection::All => (0..spec.num_views()).collect(),
    };
    if selected.is_empty() {
        return Err(Error::Empty("view selection"));
    }
    if let Some(&k) = selected.iter().find(|&&k| k >= spec.num_views()) {
        return Err(Error::InvalidParameter {
            name: "views",
            reason: format!("view {k} out of range"),
        });
    }
    let d = spec.features_per_view as f64;
    let snr2: f64 = selected
        .iter()
        .map(|&k| d * (spec.separation[k] / spec.noise_std[k]).powi(2))
        .sum();
    let p = normal_cdf(snr2.sqrt() / 2.0);
    let c = spec.num_classes as f64;
    Ok((2.0 * p + (c - 2.0) * (2.0 * p - 1.0)) / c)
}
