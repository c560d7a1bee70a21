//! Uncertainty-aware multi-view classification.
//!
//! Per-view evidence becomes a Dirichlet distribution and a subjective-logic
//! opinion; opinions from several views are fused with Dempster's rule, and
//! the view networks are trained end-to-end through the fusion with the
//! integrated cross-entropy and a KL penalty. The crate also carries the
//! view-extraction pipeline for 2-D slices, forward kernels for shifted
//! patch tokenization and locality self-attention, calibration metrics and a
//! synthetic multi-view data generator.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attention;
pub mod cli;
pub mod autodiff;
pub mod data;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod loss;
pub mod metrics;
pub mod opinion;
pub mod special;
pub mod synth;
pub mod views;

pub use error::{Error, Result};
pub use fusion::{combine_many, combine_pair, FusionResult};
pub use opinion::{
    evidence_to_opinion, expected_probabilities, opinion_to_dirichlet, vacuous_opinion, DirichletParams, Evidence,
    Opinion, ProbVector,
};
