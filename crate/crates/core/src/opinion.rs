//! Evidence, Dirichlet parameters and subjective-logic opinions.
//!
//! An evidential classifier emits a non-negative evidence vector `e`. The
//! Dirichlet over class probabilities has parameters `α = e + 1` and strength
//! `S = Σα`. The corresponding opinion assigns belief `b_c = (α_c - 1) / S` to
//! each class and keeps the remaining mass `u = C / S` as uncertainty, so that
//! `u + Σb = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the `u + Σb = 1` constraint.
pub const UNIT_SUM_TOLERANCE: f64 = 1e-12;

fn check_class_count(c: usize, what: fn(String) -> Error) -> Result<()> {
    if c < 2 {
        return Err(what(format!("need at least 2 classes, got {c}")));
    }
    Ok(())
}

/// Per-class non-negative evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EvidenceRepr", into = "EvidenceRepr")]
pub struct Evidence {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EvidenceRepr {
    evidence: Vec<f64>,
}

impl TryFrom<EvidenceRepr> for Evidence {
    type Error = Error;
    fn try_from(r: EvidenceRepr) -> Result<Self> {
        Evidence::new(r.evidence)
    }
}

impl From<Evidence> for EvidenceRepr {
    fn from(e: Evidence) -> Self {
        EvidenceRepr { evidence: e.values }
    }
}

impl Evidence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_class_count(values.len(), Error::InvalidEvidence)?;
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidEvidence(format!(
                "entry {i} is {v}; evidence must be finite and non-negative"
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(num_classes: usize) -> Result<Self> {
        Self::new(vec![0.0; num_classes])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_classes(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `α = e + 1`.
    pub fn to_dirichlet(&self) -> DirichletParams {
        DirichletParams {
            alpha: self.values.iter().map(|e| e + 1.0).collect(),
        }
    }
}

/// Dirichlet concentration parameters with every `α_c ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        check_class_count(alpha.len(), Error::InvalidDirichlet)?;
        if let Some((i, a)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !a.is_finite() || **a < 1.0)
        {
            return Err(Error::InvalidDirichlet(format!(
                "alpha[{i}] = {a}; parameters must be finite and at least 1"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn uniform(num_classes: usize) -> Result<Self> {
        Self::new(vec![1.0; num_classes])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }

    /// Dirichlet strength `S = Σα`.
    pub fn strength(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn to_opinion(&self) -> Opinion {
        let s = self.strength();
        Opinion {
            beliefs: self.alpha.iter().map(|a| (a - 1.0) / s).collect(),
            uncertainty: self.num_classes() as f64 / s,
        }
    }

    /// The evidence `α - 1` that produced these parameters.
    pub fn to_evidence(&self) -> Evidence {
        Evidence {
            values: self.alpha.iter().map(|a| a - 1.0).collect(),
        }
    }
}

/// Belief masses over singleton classes plus an explicit uncertainty mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OpinionRepr", into = "OpinionRepr")]
pub struct Opinion {
    beliefs: Vec<f64>,
    uncertainty: f64,
}

#[derive(Serialize, Deserialize)]
struct OpinionRepr {
    beliefs: Vec<f64>,
    uncertainty: f64,
}

impl TryFrom<OpinionRepr> for Opinion {
    type Error = Error;
    fn try_from(r: OpinionRepr) -> Result<Self> {
        Opinion::new(r.beliefs, r.uncertainty)
    }
}

impl From<Opinion> for OpinionRepr {
    fn from(o: Opinion) -> Self {
        OpinionRepr {
            beliefs: o.beliefs,
            uncertainty: o.uncertainty,
        }
    }
}

impl Opinion {
    /// Validates `b_c ≥ 0`, `u ∈ (0, 1]` and `u + Σb = 1` within
    /// [`UNIT_SUM_TOLERANCE`].
    pub fn new(beliefs: Vec<f64>, uncertainty: f64) -> Result<Self> {
        check_class_count(beliefs.len(), Error::InvalidOpinion)?;
        if let Some((i, b)) = beliefs
            .iter()
            .enumerate()
            .find(|(_, b)| !b.is_finite() || **b < 0.0)
        {
            return Err(Error::InvalidOpinion(format!(
                "belief[{i}] = {b}; beliefs must be finite and non-negative"
            )));
        }
        if !(uncertainty > 0.0 && uncertainty <= 1.0) {
            return Err(Error::InvalidOpinion(format!(
                "uncertainty {uncertainty} outside (0, 1]"
            )));
        }
        let total = uncertainty + beliefs.iter().sum::<f64>();
        if (total - 1.0).abs() > UNIT_SUM_TOLERANCE {
            return Err(Error::InvalidOpinion(format!(
                "u + sum(b) = {total}, expected 1"
            )));
        }
        Ok(Self {
            beliefs,
            uncertainty,
        })
    }

    pub fn beliefs(&self) -> &[f64] {
        &self.beliefs
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    pub fn num_classes(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_vacuous(&self) -> bool {
        self.uncertainty == 1.0 && self.beliefs.iter().all(|&b| b == 0.0)
    }

    /// Inverse of the evidence mapping: `S = C/u`, `α_c = b_c S + 1`.
    pub fn to_dirichlet(&self) -> DirichletParams {
        let s = self.num_classes() as f64 / self.uncertainty;
        DirichletParams {
            alpha: self.beliefs.iter().map(|b| b * s + 1.0).collect(),
        }
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("probability vector"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: "entries must lie in [0, 1]".into(),
            });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > UNIT_SUM_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: format!("entries sum to {total}, expected 1"),
            });
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.probs[self.argmax()]
    }
}

pub fn evidence_to_opinion(e: &Evidence) -> Opinion {
    e.to_dirichlet().to_opinion()
}

/// Maps an opinion back to Dirichlet parameters. `num_classes` must match the
/// opinion's class count.
pub fn opinion_to_dirichlet(d: &Opinion, num_classes: usize) -> Result<DirichletParams> {
    if d.num_classes() != num_classes {
        return Err(Error::ClassMismatch {
            expected: num_classes,
            actual: d.num_classes(),
        });
    }
    if d.uncertainty <= 0.0 {
        return Err(Error::InvalidOpinion(
            "zero uncertainty implies infinite Dirichlet strength".into(),
        ));
    }
    Ok(d.to_dirichlet())
}

/// Mean of the Dirichlet, `α / S`.
pub fn expected_probabilities(a: &DirichletParams) -> ProbVector {
    let s = a.strength();
    ProbVector {
        probs: a.alpha.iter().map(|x| x / s).collect(),
    }
}

pub fn vacuous_opinion(num_classes: usize) -> Result<Opinion> {
    check_class_count(num_classes, Error::InvalidOpinion)?;
    Ok(Opinion {
        beliefs: vec![0.0; num_classes],
        uncertainty: 1.0,
    })
}
