//! Accuracy, binary ROC AUC and top-label expected calibration error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::ProbVector;

/// One prediction. Confidence is the largest expected class probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RecordRepr", into = "RecordRepr")]
pub struct PredictionRecord {
    probs: ProbVector,
    label: usize,
    uncertainty: f64,
}

#[derive(Serialize, Deserialize)]
struct RecordRepr {
    probs: Vec<f64>,
    label: usize,
    #[serde(default)]
    uncertainty: f64,
}

impl TryFrom<RecordRepr> for PredictionRecord {
    type Error = Error;
    fn try_from(r: RecordRepr) -> Result<Self> {
        PredictionRecord::new(ProbVector::new(r.probs)?, r.label, r.uncertainty)
    }
}

impl From<PredictionRecord> for RecordRepr {
    fn from(p: PredictionRecord) -> Self {
        RecordRepr {
            probs: p.probs.probs().to_vec(),
            label: p.label,
            uncertainty: p.uncertainty,
        }
    }
}

impl PredictionRecord {
    pub fn new(probs: ProbVector, label: usize, uncertainty: f64) -> Result<Self> {
        if label >= probs.probs().len() {
            return Err(Error::InvalidLabel(format!(
                "class {label} with {} classes",
                probs.probs().len()
            )));
        }
        if !(0.0..=1.0).contains(&uncertainty) {
            return Err(Error::InvalidParameter {
                name: "uncertainty",
                reason: format!("{uncertainty} outside [0, 1]"),
            });
        }
        Ok(Self {
            probs,
            label,
            uncertainty,
        })
    }

    pub fn probs(&self) -> &ProbVector {
        &self.probs
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    pub fn confidence(&self) -> f64 {
        self.probs.max()
    }

    /// Argmax prediction, ties to the lowest class index.
    pub fn predicted(&self) -> usize {
        self.probs.argmax()
    }

    pub fn is_correct(&self) -> bool {
        self.predicted() == self.label
    }
}

/// Fraction of records whose argmax matches the label.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("prediction set"));
    }
    let correct = records.iter().filter(|r| r.is_correct()).count();
    Ok(correct as f64 / records.len() as f64)
}

/// Area under the ROC curve via the Mann–Whitney statistic with ties
/// counted as one half. `labels` are `true` for the positive class.
pub fn auc_binary(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            context: "auc inputs",
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter {
            name: "scores",
            reason: "NaN score".into(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter {
            name: "labels",
            reason: "AUC needs both classes present".into(),
        });
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the rank sum of positives, with tied groups sharing the mean rank,
    // keeps everything in exact integers.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        // Ranks start+1..=end, their mean times two is start + end + 1.
        let twice_mean = (start + end + 1) as u128;
        let pos_in_group = idx[start..end].iter().filter(|&&i| labels[i]).count() as u128;
        twice_rank_sum += twice_mean * pos_in_group;
        start = end;
    }
    let np = n_pos as u128;
    // 2U = 2R - n_pos (n_pos + 1)
    let twice_u = twice_rank_sum - np * (np + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// Per-bin summary of a reliability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

/// Equal-width, right-inclusive bins `(i/B, (i+1)/B]`; confidence 0 goes to
/// the first bin.
pub fn reliability_bins(records: &[PredictionRecord], bins: usize) -> Result<Vec<ReliabilityBin>> {
    if bins < 1 {
        return Err(Error::InvalidParameter {
            name: "bins",
            reason: "need at least one bin".into(),
        });
    }
    let mut count = vec![0usize; bins];
    let mut conf = vec![0.0; bins];
    let mut correct = vec![0usize; bins];
    for r in records {
        let c = r.confidence();
        let b = ((c * bins as f64).ceil() as usize).clamp(1, bins) - 1;
        count[b] += 1;
        conf[b] += c;
        correct[b] += usize::from(r.is_correct());
    }
    Ok((0..bins)
        .map(|b| ReliabilityBin {
            lower: b as f64 / bins as f64,
            upper: (b + 1) as f64 / bins as f64,
            count: count[b],
            mean_confidence: if count[b] > 0 { conf[b] / count[b] as f64 } else { 0.0 },
            accuracy: if count[b] > 0 {
                correct[b] as f64 / count[b] as f64
            } else {
                0.0
            },
        })
        .collect())
}

/// `Σ_b (n_b / N) |acc_b - conf_b|`.
pub fn ece(records: &[PredictionRecord], bins: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("prediction set"));
    }
    let n = records.len() as f64;
    Ok(reliability_bins(records, bins)?
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.count as f64 / n) * (b.accuracy - b.mean_confidence).abs())
        .sum())
}

/// Summary written by the `evaluate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub acc: f64,
    /// Present only for two-class predictions with both labels observed.
    pub auc: Option<f64>,
    pub ece: f64,
    pub mean_uncertainty: f64,
    pub count: usize,
}

/// Computes all metrics. AUC uses the class-1 probability as the score.
pub fn summarize(records: &[PredictionRecord], bins: usize) -> Result<MetricsSummary> {
    let acc = accuracy(records)?;
    let ece = ece(records, bins)?;
    let auc = if records.iter().all(|r| r.probs.probs().len() == 2) {
        let scores: Vec<f64> = records.iter().map(|r| r.probs.probs()[1]).collect();
        let labels: Vec<bool> = records.iter().map(|r| r.label == 1).collect();
        auc_binary(&scores, &labels).ok()
    } else {
        None
    };
    let mean_uncertainty = records.iter().map(|r| r.uncertainty).sum::<f64>() / records.len() as f64;
    Ok(MetricsSummary {
        acc,
        auc,
        ece,
        mean_uncertainty,
        count: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(probs: &[f64], label: usize) -> PredictionRecord {
        PredictionRecord::new(ProbVector::new(probs.to_vec()).unwrap(), label, 0.1).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let all = [rec(&[0.9, 0.1], 0), rec(&[0.2, 0.8], 1)];
        assert_eq!(accuracy(&all).unwrap(), 1.0);
        let none = [rec(&[0.9, 0.1], 1), rec(&[0.2, 0.8], 0)];
        assert_eq!(accuracy(&none).unwrap(), 0.0);
        let three = [
            rec(&[0.9, 0.1], 0),
            rec(&[0.2, 0.8], 1),
            rec(&[0.6, 0.4], 0),
            rec(&[0.7, 0.3], 1),
        ];
        assert_eq!(accuracy(&three).unwrap(), 0.75);
        // A tie predicts class 0.
        assert_eq!(accuracy(&[rec(&[0.5, 0.5], 0)]).unwrap(), 1.0);
        assert!(accuracy(&[]).is_err());
    }

    #[test]
    fn auc_examples() {
        let l = [false, false, true, true];
        assert_eq!(auc_binary(&[0.1, 0.2, 0.8, 0.9], &l).unwrap(), 1.0);
        assert_eq!(auc_binary(&[0.5; 4], &l).unwrap(), 0.5);
        assert_eq!(auc_binary(&[0.1, 0.4, 0.35, 0.8], &l).unwrap(), 0.75);
        assert!(auc_binary(&[0.1, 0.2], &[true, true]).is_err());
        assert!(auc_binary(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn ece_examples() {
        let perfect = [rec(&[1.0, 0.0], 0), rec(&[0.0, 1.0], 1)];
        assert_eq!(ece(&perfect, 10).unwrap(), 0.0);
        let half = [rec(&[0.5, 0.5], 0), rec(&[0.5, 0.5], 1)];
        assert_eq!(ece(&half, 10).unwrap(), 0.0);
        let fixture = [rec(&[0.9, 0.1], 0), rec(&[0.9, 0.1], 1), rec(&[0.6, 0.4], 0)];
        assert_eq!(ece(&fixture, 10).unwrap(), 0.4);
        assert!(ece(&fixture, 0).is_err());
    }

    #[test]
    fn bins_are_right_inclusive() {
        let r = [rec(&[0.6, 0.4], 0), rec(&[1.0, 0.0], 0)];
        let bins = reliability_bins(&r, 5).unwrap();
        // 0.6 lies in (0.4, 0.6], 1.0 in (0.8, 1.0].
        assert_eq!(bins[2].count, 1);
        assert_eq!(bins[4].count, 1);
    }

    #[test]
    fn record_json() {
        let r: PredictionRecord =
            serde_json::from_str(r#"{"probs":[0.3,0.7],"label":1,"uncertainty":0.2}"#).unwrap();
        assert_eq!(r.confidence(), 0.7);
        assert!(serde_json::from_str::<PredictionRecord>(r#"{"probs":[0.3,0.8],"label":1}"#)
            .is_err());
        assert!(serde_json::from_str::<PredictionRecord>(r#"{"probs":[0.3,0.7],"label":2}"#)
            .is_err());
    }
}
