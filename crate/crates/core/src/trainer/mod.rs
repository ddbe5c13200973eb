//! The three training algorithms: correlation-based LC-OR, softmax
//! cross-entropy gradient descent, and sigmoid-MSE gradient descent with
//! target adjustment — all with line-searched step sizes and
//! validation-tracked weight selection.

mod gd;
mod lc_or;
mod line_search;

pub use gd::train_gd;
pub use lc_or::train_lc_or;
pub use line_search::{optimal_learning_factor, OlfMode};

/// Train with whichever trainer the configured algorithm calls for.
pub fn train(
    train: &AugmentedBatch,
    val: &AugmentedBatch,
    cfg: &TrainerConfig,
) -> Result<TrainingReport> {
    match cfg.algorithm {
        Algorithm::MseOr => train_lc_or(train, val, cfg),
        Algorithm::Sce | Algorithm::SmseOr => train_gd(train, val, cfg),
    }
}

use rayon::prelude::*;

use crate::classifier::{
    classification_error, forward, predict, AugmentedBatch, WeightMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, RidgePolicy};
use crate::output_reset::{or_classic, or_pe, or_type2, AdjustedTargets, OrVariant};

/// Which objective a trainer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Softmax cross-entropy by gradient descent.
    Sce,
    /// Adjusted MSE by repeated correlation solves (LC-OR).
    MseOr,
    /// Sigmoid-MSE with target adjustment by gradient descent.
    SmseOr,
}

impl Algorithm {
    /// Stable lowercase name used by the CLI and report files.
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Sce => "sce",
            Algorithm::MseOr => "mse-or",
            Algorithm::SmseOr => "smse-or",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sce" => Ok(Algorithm::Sce),
            "mse-or" => Ok(Algorithm::MseOr),
            "smse-or" => Ok(Algorithm::SmseOr),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected sce, mse-or, or smse-or)"
            ))),
        }
    }
}

/// Everything a training run needs to know. `new` fills in the conventional
/// defaults: 5000 iterations for the gradient trainers, 10 outer iterations
/// for LC-OR, classic target adjustment, b = 1.
#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub algorithm: Algorithm,
    pub iterations: usize,
    /// `None` disables target adjustment (identity targets — the plain
    /// least-squares / plain sigmoid-MSE baseline).
    pub or_variant: Option<OrVariant>,
    /// Inner iterations of the classic adjustment (conventional cap: 3).
    pub or_inner_iterations: usize,
    /// One-hot target amplitude.
    pub b: f64,
    /// Seeds mini-batch shuffling; full-batch runs are deterministic anyway.
    pub seed: u64,
    pub olf_mode: OlfMode,
    /// Passed through to the linear-system solver untouched.
    pub ridge_policy: RidgePolicy,
    /// `Some(k)` switches the gradient trainers to shuffled mini-batches of
    /// size k; `None` (the default) is full-batch.
    pub batch_size: Option<usize>,
    /// Study flag: use the literal summed form of the sigmoid-MSE error
    /// signal instead of the per-output chain rule.
    pub smse_summed_delta: bool,
}

impl TrainerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        TrainerConfig {
            algorithm,
            iterations: match algorithm {
                Algorithm::MseOr => 10,
                _ => 5000,
            },
            or_variant: Some(OrVariant::Classic),
            or_inner_iterations: 3,
            b: 1.0,
            seed: 0,
            olf_mode: OlfMode::SecondOrder,
            ridge_policy: RidgePolicy::default(),
            batch_size: None,
            smse_summed_delta: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(1..=10).contains(&self.or_inner_iterations) {
            return Err(Error::Config(format!(
                "or_inner_iterations must be in [1, 10], got {}",
                self.or_inner_iterations
            )));
        }
        if !(self.b > 0.0) {
            return Err(Error::Config(format!(
                "target amplitude b must be positive, got {}",
                self.b
            )));
        }
        if let Some(bs) = self.batch_size {
            if bs < 1 {
                return Err(Error::Config("batch_size must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of a training run. Iteration indices are 0-based; histories are
/// as long as the number of iterations actually run (early halts and stalls
/// cut them short). P_e entries are fractions in [0, 1]; `final_test_pe` is
/// a percentage, filled in by the evaluation layer.
#[derive(Debug, Clone)]
pub struct TrainingReport {
    /// Per-iteration objective (E′ for the adjusted trainers, CE for SCE),
    /// evaluated at that iteration's weights before any update.
    pub loss_history: Vec<f64>,
    pub train_pe_history: Vec<f64>,
    pub val_pe_history: Vec<f64>,
    /// Earliest iteration whose weights minimize validation P_e.
    pub best_val_iteration: usize,
    /// Snapshot of the weights at `best_val_iteration`.
    pub best_weights: WeightMatrix,
    /// Testing P_e (percent) of `best_weights`; set by the evaluation layer.
    pub final_test_pe: Option<f64>,
    /// Iterations at which the line search found no decreasing step.
    pub stall_iterations: Vec<usize>,
}

/// R = (1/N_v)·Σ x_ap·x_apᵀ and C = (1/N_v)·Σ x_ap·t_pᵀ.
#[derive(Debug, Clone)]
pub struct CorrelationPair {
    /// Input autocorrelation, N_u × N_u, exactly symmetric.
    pub r: Matrix,
    /// Input–target cross-correlation, N_u × M.
    pub c: Matrix,
}

/// Patterns are reduced in a fixed number of index blocks combined in block
/// order, so the sums are bit-identical no matter how many threads run.
const REDUCTION_BLOCKS: usize = 8;

fn block_range(n: usize, block: usize) -> std::ops::Range<usize> {
    (block * n / REDUCTION_BLOCKS)..((block + 1) * n / REDUCTION_BLOCKS)
}

/// Accumulate both correlation matrices in one pass over the patterns.
pub fn accumulate_correlations(
    batch: &AugmentedBatch,
    targets: &Matrix,
) -> Result<CorrelationPair> {
    if targets.rows() != batch.num_patterns() {
        return Err(Error::DimensionMismatch {
            op: "accumulate_correlations",
            left_rows: batch.num_patterns(),
            left_cols: batch.num_aug_features(),
            right_rows: targets.rows(),
            right_cols: targets.cols(),
        });
    }
    let n_v = batch.num_patterns();
    let n_u = batch.num_aug_features();
    let m = targets.cols();
    let partials: Vec<(Matrix, Matrix)> = (0..REDUCTION_BLOCKS)
        .into_par_iter()
        .map(|block| {
            let mut r = Matrix::zeros(n_u, n_u);
            let mut c = Matrix::zeros(n_u, m);
            for p in block_range(n_v, block) {
                let x = batch.patterns().row(p);
                let t = targets.row(p);
                for i in 0..n_u {
                    let xi = x[i];
                    // Upper triangle only; mirrored below.
                    let r_row = r.row_mut(i);
                    for j in i..n_u {
                        r_row[j] += xi * x[j];
                    }
                    let c_row = c.row_mut(i);
                    for (cv, tv) in c_row.iter_mut().zip(t) {
                        *cv += xi * tv;
                    }
                }
            }
            (r, c)
        })
        .collect();
    let mut r = Matrix::zeros(n_u, n_u);
    let mut c = Matrix::zeros(n_u, m);
    for (pr, pc) in partials {
        r.add_scaled(1.0, &pr).expect("fixed shape");
        c.add_scaled(1.0, &pc).expect("fixed shape");
    }
    let scale = 1.0 / n_v as f64;
    r.scale(scale);
    c.scale(scale);
    // Mirror the upper triangle so R is bitwise symmetric.
    for i in 0..n_u {
        for j in (i + 1)..n_u {
            let v = r.get(i, j);
            r.set(j, i, v);
        }
    }
    Ok(CorrelationPair { r, c })
}

/// Rebuild only the cross-correlation C = (1/N_v)·Σ x_ap·t_pᵀ — the cheap
/// half, re-run every outer iteration of LC-OR while R stays fixed.
pub fn cross_correlation(batch: &AugmentedBatch, targets: &Matrix) -> Result<Matrix> {
    if targets.rows() != batch.num_patterns() {
        return Err(Error::DimensionMismatch {
            op: "cross_correlation",
            left_rows: batch.num_patterns(),
            left_cols: batch.num_aug_features(),
            right_rows: targets.rows(),
            right_cols: targets.cols(),
        });
    }
    let n_v = batch.num_patterns();
    let n_u = batch.num_aug_features();
    let m = targets.cols();
    let partials: Vec<Matrix> = (0..REDUCTION_BLOCKS)
        .into_par_iter()
        .map(|block| {
            let mut c = Matrix::zeros(n_u, m);
            for p in block_range(n_v, block) {
                let x = batch.patterns().row(p);
                let t = targets.row(p);
                for i in 0..n_u {
                    let xi = x[i];
                    let c_row = c.row_mut(i);
                    for (cv, tv) in c_row.iter_mut().zip(t) {
                        *cv += xi * tv;
                    }
                }
            }
            c
        })
        .collect();
    let mut c = Matrix::zeros(n_u, m);
    for pc in partials {
        c.add_scaled(1.0, &pc).expect("fixed shape");
    }
    c.scale(1.0 / n_v as f64);
    Ok(c)
}

/// Apply the configured target adjustment to outputs `y` against the base
/// targets.
pub(crate) fn apply_or(
    variant: OrVariant,
    y: &Matrix,
    targets: &Matrix,
    labels: &[usize],
    cfg: &TrainerConfig,
) -> Result<AdjustedTargets> {
    match variant {
        OrVariant::Classic => or_classic(y, targets, labels, cfg.or_inner_iterations),
        OrVariant::Type2 => or_type2(y, targets, labels),
        OrVariant::PeProportional => or_pe(y, targets, labels, cfg.b),
    }
}

/// Classification error of `w` on a batch, as a fraction.
pub(crate) fn evaluate_pe(w: &WeightMatrix, batch: &AugmentedBatch) -> Result<f64> {
    let y = forward(w, batch)?;
    classification_error(&predict(&y), batch.labels())
}

/// Running tracker for the earliest-argmin best-validation snapshot.
pub(crate) struct BestTracker {
    pub best_val_pe: f64,
    pub best_iteration: usize,
    pub best_weights: WeightMatrix,
}

impl BestTracker {
    pub fn start(iteration: usize, val_pe: f64, w: &WeightMatrix) -> Self {
        BestTracker {
            best_val_pe: val_pe,
            best_iteration: iteration,
            best_weights: w.clone(),
        }
    }

    /// Strict improvement only: ties keep the earliest iteration.
    pub fn observe(&mut self, iteration: usize, val_pe: f64, w: &WeightMatrix) {
        if val_pe < self.best_val_pe {
            self.best_val_pe = val_pe;
            self.best_iteration = iteration;
            self.best_weights = w.clone();
        }
    }
}
