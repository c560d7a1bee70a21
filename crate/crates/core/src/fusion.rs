//! Dempster's rule of combination for subjective-logic opinions.
//!
//! For two opinions over the same `C` classes,
//!
//! ```text
//! b_c = (b¹_c b²_c + b¹_c u² + b²_c u¹) / N
//! u   = u¹ u² / N
//! N   = 1 - Σ_{i≠j} b¹_i b²_j
//! ```
//!
//! `N` is one minus the mass both opinions place on contradictory classes.
//! It is reported with every combination so callers can see how much the
//! inputs disagreed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::Opinion;

/// Combinations with a normalization factor at or below this are rejected.
pub const MIN_NORMALIZATION: f64 = 1e-12;

/// Outcome of combining one or more opinions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub combined: Opinion,
    /// Normalization factor `N` of every pairwise step, in fold order.
    pub conflicts: Vec<f64>,
    /// Positions of the inputs in the order they were folded.
    pub order: Vec<usize>,
}

impl FusionResult {
    /// Product of the per-step normalization factors.
    pub fn total_normalization(&self) -> f64 {
        self.conflicts.iter().product()
    }
}

/// Raw Dempster combination on slices; returns `(beliefs, u, N)`.
///
/// For valid opinions `N = 1 - Σ_{i≠j} b¹_i b²_j` equals the total of the
/// unnormalized masses. Summing those positive terms keeps full relative
/// precision when the conflict is close to 1, where `1 - K` would not.
///
/// Shared with the gradient tape so training and inference evaluate the
/// identical expression.
pub(crate) fn dempster(b1: &[f64], u1: f64, b2: &[f64], u2: f64) -> (Vec<f64>, f64, f64) {
    let masses: Vec<f64> = b1
        .iter()
        .zip(b2)
        .map(|(x, y)| x * y + x * u2 + y * u1)
        .collect();
    let mass_u = u1 * u2;
    let n = masses.iter().sum::<f64>() + mass_u;
    (masses.iter().map(|m| m / n).collect(), mass_u / n, n)
}

/// Combines two opinions with Dempster's rule.
pub fn combine_pair(d1: &Opinion, d2: &Opinion) -> Result<FusionResult> {
    if d1.num_classes() != d2.num_classes() {
        return Err(Error::ClassMismatch {
            expected: d1.num_classes(),
            actual: d2.num_classes(),
        });
    }
    // The vacuous opinion is the identity; return the other side untouched.
    for (v, other) in [(d1, d2), (d2, d1)] {
        if v.is_vacuous() {
            return Ok(FusionResult {
                combined: other.clone(),
                conflicts: vec![1.0],
                order: vec![0, 1],
            });
        }
    }
    let (beliefs, u, n) = dempster(d1.beliefs(), d1.uncertainty(), d2.beliefs(), d2.uncertainty());
    if !(n > MIN_NORMALIZATION) {
        return Err(Error::TotalConflict(n));
    }
    Ok(FusionResult {
        combined: Opinion::new(beliefs, u)?,
        conflicts: vec![n],
        order: vec![0, 1],
    })
}

/// Left fold of [`combine_pair`]: `((d₀ ⊕ d₁) ⊕ d₂) ⊕ …`.
///
/// A single opinion is returned unchanged with no conflict entries.
pub fn combine_many(ds: &[Opinion]) -> Result<FusionResult> {
    let (first, rest) = ds.split_first().ok_or(Error::Empty("opinion list"))?;
    let mut combined = first.clone();
    let mut conflicts = Vec::with_capacity(rest.len());
    for d in rest {
        let step = combine_pair(&combined, d)?;
        conflicts.push(step.conflicts[0]);
        combined = step.combined;
    }
    Ok(FusionResult {
        combined,
        conflicts,
        order: (0..ds.len()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opinion::vacuous_opinion;

    fn op(b: &[f64], u: f64) -> Opinion {
        Opinion::new(b.to_vec(), u).unwrap()
    }

    #[test]
    fn vacuous_is_identity() {
        let d = op(&[0.3, 0.45, 0.05], 0.2);
        let v = vacuous_opinion(3).unwrap();
        assert_eq!(combine_pair(&v, &d).unwrap().combined, d);
        assert_eq!(combine_pair(&d, &v).unwrap().combined, d);
    }

    #[test]
    fn conflicting_pair_fixture() {
        let r = combine_pair(&op(&[0.6, 0.2], 0.2), &op(&[0.2, 0.6], 0.2)).unwrap();
        assert!((r.conflicts[0] - 0.6).abs() < 1e-12);
        let b = r.combined.beliefs();
        assert!((b[0] - 0.28 / 0.6).abs() < 1e-12);
        assert!((b[1] - 0.28 / 0.6).abs() < 1e-12);
        assert!((r.combined.uncertainty() - 0.04 / 0.6).abs() < 1e-12);
    }

    #[test]
    fn agreement_reduces_uncertainty() {
        let d = op(&[0.8, 0.1], 0.1);
        let r = combine_pair(&d, &d).unwrap();
        let n = 1.0 - 2.0 * 0.8 * 0.1;
        assert!((r.combined.uncertainty() - 0.01 / n).abs() < 1e-15);
        assert!(r.combined.uncertainty() < 0.1);
    }

    #[test]
    fn combine_many_folds_left() {
        let d1 = op(&[0.5, 0.1], 0.4);
        let d2 = op(&[0.2, 0.3], 0.5);
        let d3 = op(&[0.05, 0.75], 0.2);
        let single = combine_many(std::slice::from_ref(&d1)).unwrap();
        assert_eq!(single.combined, d1);
        assert!(single.conflicts.is_empty());

        let all = combine_many(&[d1.clone(), d2.clone(), d3.clone()]).unwrap();
        let step = combine_pair(&combine_pair(&d1, &d2).unwrap().combined, &d3).unwrap();
        assert_eq!(all.combined, step.combined);
        assert_eq!(all.conflicts.len(), 2);
        assert_eq!(all.order, vec![0, 1, 2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(combine_many(&[]), Err(Error::Empty(_))));
        let r = combine_pair(&vacuous_opinion(2).unwrap(), &vacuous_opinion(3).unwrap());
        assert!(matches!(r, Err(Error::ClassMismatch { .. })));
    }

    #[test]
    fn near_total_conflict_is_rejected() {
        // Opposite, almost dogmatic opinions.
        let a = Opinion::new(vec![1.0 - 1e-14, 0.0], 1e-14).unwrap();
        let b = Opinion::new(vec![0.0, 1.0 - 1e-14], 1e-14).unwrap();
        assert!(matches!(combine_pair(&a, &b), Err(Error::TotalConflict(_))));
    }
}
