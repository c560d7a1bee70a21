//! Reverse-mode differentiation over matrix-valued nodes, the per-view
//! evidential networks built on it, Adam, and the training loop.

pub mod net;
pub mod optim;
pub mod tape;
pub mod train;

pub use net::{Checkpoint, Dense, EvidentialNet, Model, ModelShape, Prediction, CHECKPOINT_VERSION};
pub use optim::{poly_lr, Adam};
pub use tape::{softplus, GradTape, Gradients, NodeId, Tensor};
pub use train::{
    evaluate_model, loss_and_grad, shape_for, train, BatchOutput, EpochRecord, Evaluation, LossTerms, TrainConfig,
    TrainReport,
};
