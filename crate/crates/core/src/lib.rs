//! Regression-based linear classifiers trained by adjusting their own
//! targets.
//!
//! The crate trains one-layer classifiers `y = W·x_a` on mean-squared error
//! and fights the known mismatch between regression targets and the argmax
//! decision rule with *output reset*: before each weight update the targets
//! are moved toward the current outputs wherever the discrepancy cannot
//! affect the decision. Three adjustment variants are provided (the classic
//! bias-plus-clamped-offsets scheme, a per-slot clamp, and an
//! error-proportional scheme whose adjusted risk equals `2b²·Pe`), driven
//! either by repeated normal-equation solves or by steepest descent with an
//! optimal learning factor. Softmax cross-entropy and sigmoid-MSE trainers
//! serve as baselines, and a fixed 10-fold protocol evaluates everything
//! reproducibly.

pub mod classifier;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod losses;
pub mod output_reset;
pub mod trainer;

pub use classifier::{
    augment, classification_error, forward, predict, AugmentedBatch, Discriminants, WeightMatrix,
};
pub use error::{Error, Result};
pub use trainer::{train_gd, train_lc_or, Algorithm, TrainerConfig, TrainingReport};
