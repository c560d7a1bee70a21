//! Dirichlet losses for evidential classifiers.
//!
//! * integrated cross-entropy `Σ_c y_c (ψ(S) - ψ(α_c))`, the expected
//!   cross-entropy when `p ~ Dir(α)`;
//! * the regularizer `KL[Dir(α̃) ‖ Dir(1)]` on the label-masked parameters
//!   `α̃ = y + (1 - y) ⊙ α`, which pushes evidence for wrong classes to zero;
//! * `view_loss = ICE + λ KL` and the multi-view sum over local views, the
//!   global view and the fused opinion.
//!
//! The KL closed form is the Dirichlet-vs-Dirichlet identity with the
//! second argument fixed to the uniform Dirichlet:
//!
//! ```text
//! KL = ln Γ(S̃) - Σ ln Γ(α̃_c) - ln Γ(C) + Σ (α̃_c - 1)(ψ(α̃_c) - ψ(S̃))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::DirichletParams;
use crate::special::{digamma_unchecked, log_gamma_unchecked, trigamma_unchecked};

/// One-hot class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotLabel {
    class: usize,
    num_classes: usize,
}

impl OneHotLabel {
    pub fn new(class: usize, num_classes: usize) -> Result<Self> {
        if num_classes < 2 || class >= num_classes {
            return Err(Error::InvalidLabel(format!(
                "class {class} with {num_classes} classes"
            )));
        }
        Ok(Self { class, num_classes })
    }

    /// Builds a label from an explicit 0/1 vector with exactly one 1.
    pub fn from_vector(y: &[f64]) -> Result<Self> {
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidLabel("entries must be 0 or 1".into()));
        }
        let ones: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1.0).collect();
        match ones.as_slice() {
            [c] => Self::new(*c, y.len()),
            _ => Err(Error::InvalidLabel(format!(
                "expected exactly one 1, found {}",
                ones.len()
            ))),
        }
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn to_vector(&self) -> Vec<f64> {
        (0..self.num_classes)
            .map(|c| if c == self.class { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Linear ramp of the regularizer weight from 0 to 1, clamped at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub total_steps: usize,
    pub current_step: usize,
}

impl AnnealSchedule {
    pub fn new(total_steps: usize) -> Self {
        Self {
            total_steps,
            current_step: 0,
        }
    }

    /// `min(1, step / total_steps)`; a zero-length schedule is always 1.
    pub fn lambda_at(&self, step: usize) -> f64 {
        if self.total_steps == 0 {
            return 1.0;
        }
        (step as f64 / self.total_steps as f64).min(1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_at(self.current_step)
    }

    pub fn advance(&mut self) {
        self.current_step += 1;
    }
}

fn check_classes(a: &DirichletParams, y: &OneHotLabel) -> Result<()> {
    if a.num_classes() != y.num_classes() {
        return Err(Error::ClassMismatch {
            expected: y.num_classes(),
            actual: a.num_classes(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{lambda} outside [0, 1]"),
        });
    }
    Ok(())
}

/// `ψ(S) - ψ(α_y)`.
pub fn integrated_ce(a: &DirichletParams, y: &OneHotLabel) -> Result<f64> {
    check_classes(a, y)?;
    Ok(ice_raw(a.alpha(), y.class()))
}

/// `KL[Dir(α̃) ‖ Dir(1)]`.
pub fn kl_to_uniform(a_tilde: &DirichletParams) -> f64 {
    // Non-negative in exact arithmetic; rounding can leave -1e-16 near α̃ = 1.
    kl_raw(a_tilde.alpha()).max(0.0)
}

/// `α̃_c = 1` where `y_c = 1`, otherwise `α_c`.
pub fn masked_alpha(a: &DirichletParams, y: &OneHotLabel) -> Result<DirichletParams> {
    check_classes(a, y)?;
    let mut alpha = a.alpha().to_vec();
    alpha[y.class()] = 1.0;
    DirichletParams::new(alpha)
}

/// `ICE + λ KL(α̃)` for a single view.
pub fn view_loss(a: &DirichletParams, y: &OneHotLabel, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let ice = integrated_ce(a, y)?;
    if lambda == 0.0 {
        return Ok(ice);
    }
    Ok(ice + lambda * kl_to_uniform(&masked_alpha(a, y)?))
}

/// Sum of the per-view losses of every local view, the global view and the
/// combined opinion, all with the same `λ`.
pub fn overall_loss(
    views: &[DirichletParams],
    global: &DirichletParams,
    combined: &DirichletParams,
    y: &OneHotLabel,
    lambda: f64,
) -> Result<f64> {
    let mut total = view_loss(combined, y, lambda)? + view_loss(global, y, lambda)?;
    for v in views {
        total += view_loss(v, y, lambda)?;
    }
    Ok(total)
}

pub(crate) fn ice_raw(alpha: &[f64], class: usize) -> f64 {
    let s: f64 = alpha.iter().sum();
    digamma_unchecked(s) - digamma_unchecked(alpha[class])
}

pub(crate) fn kl_raw(alpha: &[f64]) -> f64 {
    let c = alpha.len() as f64;
    let s: f64 = alpha.iter().sum();
    let psi_s = digamma_unchecked(s);
    let mut kl = log_gamma_unchecked(s) - log_gamma_unchecked(c);
    for &a in alpha {
        kl += (a - 1.0) * (digamma_unchecked(a) - psi_s) - log_gamma_unchecked(a);
    }
    kl
}

/// Value and gradient with respect to `α` of `ICE + λ KL(α̃)`.
///
/// ```text
/// ∂ICE/∂α_j   = ψ'(S) - [j = y] ψ'(α_y)
/// ∂KL/∂α̃_j    = (α̃_j - 1) ψ'(α̃_j) - (S̃ - C) ψ'(S̃)
/// ```
///
/// `α̃_y` is the constant 1, so the KL gradient only reaches the other
/// classes.
pub(crate) fn view_loss_and_grad(alpha: &[f64], class: usize, lambda: f64) -> (f64, Vec<f64>) {
    let s: f64 = alpha.iter().sum();
    let tri_s = trigamma_unchecked(s);
    let mut loss = ice_raw(alpha, class);
    let mut grad = vec![tri_s; alpha.len()];
    grad[class] -= trigamma_unchecked(alpha[class]);

    if lambda != 0.0 {
        let mut masked = alpha.to_vec();
        masked[class] = 1.0;
        loss += lambda * kl_raw(&masked);
        let s_tilde: f64 = masked.iter().sum();
        let shift = (s_tilde - masked.len() as f64) * trigamma_unchecked(s_tilde);
        for (j, g) in grad.iter_mut().enumerate() {
            if j != class {
                let a = masked[j];
                *g += lambda * ((a - 1.0) * trigamma_unchecked(a) - shift);
            }
        }
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(a: &[f64]) -> DirichletParams {
        DirichletParams::new(a.to_vec()).unwrap()
    }

    fn label(c: usize, n: usize) -> OneHotLabel {
        OneHotLabel::new(c, n).unwrap()
    }

    #[test]
    fn ice_examples() {
        let l = integrated_ce(&dir(&[1.0, 1.0]), &label(0, 2)).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let l = integrated_ce(&dir(&[2.0, 2.0]), &label(0, 2)).unwrap();
        assert!((l - (0.5 + 1.0 / 3.0)).abs() < 1e-12);
        assert!(integrated_ce(&dir(&[1.0, 1.0]), &label(0, 3)).is_err());
    }

    #[test]
    fn kl_examples() {
        assert!(kl_to_uniform(&dir(&[1.0, 1.0])).abs() < 1e-14);
        assert!(kl_to_uniform(&dir(&[1.0; 5])).abs() < 1e-13);
        let expected = std::f64::consts::LN_2 - 0.5;
        assert!((kl_to_uniform(&dir(&[2.0, 1.0])) - expected).abs() < 1e-12);
    }

    #[test]
    fn masking() {
        assert_eq!(masked_alpha(&dir(&[4.0, 2.0]), &label(0, 2)).unwrap().alpha(), &[1.0, 2.0]);
        assert_eq!(masked_alpha(&dir(&[3.0, 5.0]), &label(1, 2)).unwrap().alpha(), &[3.0, 1.0]);
        assert_eq!(masked_alpha(&dir(&[1.0; 4]), &label(2, 4)).unwrap().alpha(), &[1.0; 4]);
    }

    #[test]
    fn view_loss_composition() {
        let a = dir(&[3.0, 1.5, 2.0]);
        let y = label(1, 3);
        assert_eq!(view_loss(&a, &y, 0.0).unwrap(), integrated_ce(&a, &y).unwrap());
        let l = view_loss(&dir(&[1.0, 1.0]), &label(0, 2), 1.0).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=10 {
            let l = view_loss(&a, &y, k as f64 / 10.0).unwrap();
            assert!(l >= prev);
            prev = l;
        }
        assert!(view_loss(&a, &y, 1.5).is_err());
        assert!(view_loss(&a, &y, -0.1).is_err());
    }

    #[test]
    fn overall_loss_is_additive() {
        let y = label(0, 2);
        let g = dir(&[2.0, 1.3]);
        let v = view_loss(&g, &y, 0.4).unwrap();
        assert!((overall_loss(&[], &g, &g, &y, 0.4).unwrap() - 2.0 * v).abs() < 1e-14);

        let local = dir(&[4.0, 2.0]);
        let comb = dir(&[7.0, 2.5]);
        let lv = view_loss(&local, &y, 0.4).unwrap();
        let total = overall_loss(&[local.clone(), local], &g, &comb, &y, 0.4).unwrap();
        let expected = view_loss(&comb, &y, 0.4).unwrap() + v + 2.0 * lv;
        assert!((total - expected).abs() < 1e-12);
        assert!(overall_loss(&[dir(&[1.0; 3])], &g, &g, &y, 0.4).is_err());
    }

    #[test]
    fn raw_gradient_matches_finite_differences() {
        let alpha = [2.3, 1.4, 5.1];
        for class in 0..3 {
            for &lambda in &[0.0, 0.35, 1.0] {
                let (_, g) = view_loss_and_grad(&alpha, class, lambda);
                for j in 0..3 {
                    let h = 1e-6;
                    let mut hi = alpha;
                    let mut lo = alpha;
                    hi[j] += h;
                    lo[j] -= h;
                    let fd = (view_loss_and_grad(&hi, class, lambda).0
                        - view_loss_and_grad(&lo, class, lambda).0)
                        / (2.0 * h);
                    assert!((fd - g[j]).abs() < 1e-7, "class {class} λ {lambda} j {j}");
                }
            }
        }
    }

    #[test]
    fn kl_gradient_vanishes_at_uniform() {
        let (_, g_kl) = view_loss_and_grad(&[1.0, 1.0, 1.0], 0, 1.0);
        let (_, g_ice) = view_loss_and_grad(&[1.0, 1.0, 1.0], 0, 0.0);
        for j in 0..3 {
            assert!((g_kl[j] - g_ice[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn anneal_schedule() {
        let mut s = AnnealSchedule::new(4);
        let mut seen = vec![];
        for _ in 0..7 {
            seen.push(s.lambda());
            s.advance();
        }
        assert_eq!(seen, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.0, 1.0]);
        assert_eq!(AnnealSchedule::new(0).lambda(), 1.0);
    }

    #[test]
    fn labels() {
        assert_eq!(OneHotLabel::from_vector(&[0.0, 1.0, 0.0]).unwrap().class(), 1);
        assert!(OneHotLabel::from_vector(&[1.0, 1.0]).is_err());
        assert!(OneHotLabel::from_vector(&[0.0, 0.0]).is_err());
        assert!(OneHotLabel::new(2, 2).is_err());
    }
}
