use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{classification_error, forward, predict, AugmentedBatch, WeightMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::losses::{
    cross_entropy, delta_ce, delta_mse_sigmoid, delta_mse_sigmoid_summed, gradient, mse,
    sigmoid_rows, softmax_rows,
};
use crate::trainer::{
    apply_or, evaluate_pe, optimal_learning_factor, Algorithm, BestTracker, TrainerConfig,
    TrainingReport,
};

/// After the line search proposes a factor, the candidate weights are
/// re-scored with a fresh forward pass and accepted only if the loss against
/// the fixed iteration targets actually drops; the factor is halved this
/// many times before the iteration is declared stalled.
const TRUE_STEP_RETRIES: u32 = 4;

/// Steepest-descent training with a per-iteration optimal learning factor,
/// for the softmax-cross-entropy and sigmoid-regression objectives.
///
/// Iteration k records loss and error rates at the weights W_k *before*
/// updating, so histories align with the weights that produced them and the
/// snapshot of the best-validation weights can be replayed exactly. With
/// `batch_size` unset the full batch is used and a stalled line search halts
/// training (the situation is deterministic and would repeat forever); with
/// `batch_size` set, patterns are reshuffled every epoch, a stall is
/// recorded only when no chunk moved, and training continues.
pub fn train_gd(
    train: &AugmentedBatch,
    val: &AugmentedBatch,
    cfg: &TrainerConfig,
) -> Result<TrainingReport> {
    cfg.validate()?;
    if cfg.algorithm == Algorithm::MseOr {
        return Err(Error::Config(format!(
            "train_gd handles the sce and smse-or algorithms, got {}",
            cfg.algorithm.name()
        )));
    }
    match cfg.batch_size {
        None => full_batch(train, val, cfg),
        Some(batch_size) => mini_batch(train, val, cfg, batch_size),
    }
}

/// The loss landscape restricted to a descent ray, captured so that probe
/// evaluations and the final acceptance check score candidate outputs
/// against the *same* targets the gradient was computed from.
enum RayObjective<'a> {
    CrossEntropy { labels: &'a [usize] },
    SigmoidMse { t_prime: Matrix },
}

fn loss_on_scores(scores: &Matrix, objective: &RayObjective) -> Result<f64> {
    match objective {
        RayObjective::CrossEntropy { labels } => {
            Ok(cross_entropy(&softmax_rows(scores), labels)?.value)
        }
        RayObjective::SigmoidMse { t_prime } => Ok(mse(&sigmoid_rows(scores), t_prime)?.value),
    }
}

struct ObjectiveEval<'a> {
    loss: f64,
    delta: Matrix,
    objective: RayObjective<'a>,
}

/// Loss and error signal at the given pre-activation scores. For the
/// sigmoid objective the targets are first adjusted toward the current
/// outputs when an adjustment variant is configured, and those adjusted
/// targets stay fixed for the rest of the iteration.
fn evaluate_objective<'a>(
    scores: &Matrix,
    batch: &'a AugmentedBatch,
    cfg: &TrainerConfig,
) -> Result<ObjectiveEval<'a>> {
    match cfg.algorithm {
        Algorithm::Sce => {
            let q = softmax_rows(scores);
            let loss = cross_entropy(&q, batch.labels())?.value;
            let delta = delta_ce(&q, batch.labels())?;
            Ok(ObjectiveEval {
                loss,
                delta,
                objective: RayObjective::CrossEntropy {
                    labels: batch.labels(),
                },
            })
        }
        Algorithm::SmseOr => {
            let outputs = sigmoid_rows(scores);
            let t_prime = match cfg.or_variant {
                Some(variant) => {
                    apply_or(variant, &outputs, batch.targets(), batch.labels(), cfg)?
                        .into_t_prime()
                }
                None => batch.targets().clone(),
            };
            let loss = mse(&outputs, &t_prime)?.value;
            let delta = if cfg.smse_summed_delta {
                delta_mse_sigmoid_summed(&outputs, &t_prime)?
            } else {
                delta_mse_sigmoid(&outputs, &t_prime)?
            };
            Ok(ObjectiveEval {
                loss,
                delta,
                objective: RayObjective::SigmoidMse { t_prime },
            })
        }
        Algorithm::MseOr => Err(Error::Config(
            "mse-or has no gradient objective".to_string(),
        )),
    }
}

/// Line-search along -G and return the accepted `(weights, scores)` pair,
/// or `None` when no probed factor lowers the loss. Probes run on the
/// affine ray `scores - z·(X·Gᵀ)`, which prices a probe at one loss
/// evaluation instead of a weight-space forward pass; acceptance then
/// recomputes the candidate's scores from its weights so the pair that
/// seeds the next iteration is exact.
fn take_step(
    w: &WeightMatrix,
    scores: &Matrix,
    eval: &ObjectiveEval<'_>,
    g: &Matrix,
    batch: &AugmentedBatch,
    cfg: &TrainerConfig,
) -> Result<Option<(WeightMatrix, Matrix)>> {
    let d_scores = batch.patterns().matmul_transpose(g)?;
    let ray = |z: f64| {
        if z == 0.0 {
            return eval.loss;
        }
        let mut probe = scores.clone();
        probe
            .add_scaled(-z, &d_scores)
            .expect("probe scores share the cached shape");
        loss_on_scores(&probe, &eval.objective)
            .map(|l| if l.is_finite() { l } else { f64::INFINITY })
            .expect("objective is consistent with its scores")
    };
    let z0 = optimal_learning_factor(ray, cfg.olf_mode);
    if z0 == 0.0 {
        return Ok(None);
    }
    let mut z = z0;
    for _ in 0..TRUE_STEP_RETRIES {
        let mut next = w.matrix().clone();
        next.add_scaled(-z, g)?;
        let w_next = WeightMatrix::new(next)?;
        let scores_next = forward(&w_next, batch)?;
        let true_loss = loss_on_scores(&scores_next, &eval.objective)?;
        if true_loss < eval.loss {
            return Ok(Some((w_next, scores_next)));
        }
        z /= 2.0;
    }
    Ok(None)
}

fn non_finite_loss(iteration: usize, loss: f64, w: &WeightMatrix, scores: &Matrix) -> Error {
    Error::NonFiniteLoss {
        iteration,
        loss,
        max_abs_weight: w.matrix().max_abs(),
        max_abs_output: scores.max_abs(),
    }
}

fn full_batch(
    train: &AugmentedBatch,
    val: &AugmentedBatch,
    cfg: &TrainerConfig,
) -> Result<TrainingReport> {
    let mut w = WeightMatrix::zeros(train.num_classes(), train.num_aug_features());
    let mut scores = forward(&w, train)?;
    let mut loss_history = Vec::new();
    let mut train_pe_history = Vec::new();
    let mut val_pe_history = Vec::new();
    let mut stall_iterations = Vec::new();
    let mut best: Option<BestTracker> = None;

    for k in 0..cfg.iterations {
        let eval = evaluate_objective(&scores, train, cfg)?;
        if !eval.loss.is_finite() {
            return Err(non_finite_loss(k, eval.loss, &w, &scores));
        }
        let train_pe = classification_error(&predict(&scores), train.labels())?;
        let val_pe = evaluate_pe(&w, val)?;
        loss_history.push(eval.loss);
        train_pe_history.push(train_pe);
        val_pe_history.push(val_pe);
        match &mut best {
            None => best = Some(BestTracker::start(k, val_pe, &w)),
            Some(b) => b.observe(k, val_pe, &w),
        }
        if k + 1 == cfg.iterations {
            break;
        }
        let g = gradient(&eval.delta, train)?;
        match take_step(&w, &scores, &eval, &g, train, cfg)? {
            Some((w_next, scores_next)) => {
                w = w_next;
                scores = scores_next;
            }
            None => {
                stall_iterations.push(k);
                break;
            }
        }
    }

    let best = best.expect("at least one iteration ran");
    Ok(TrainingReport {
        loss_history,
        train_pe_history,
        val_pe_history,
        best_val_iteration: best.best_iteration,
        best_weights: best.best_weights,
        final_test_pe: None,
        stall_iterations,
    })
}

fn mini_batch(
    train: &AugmentedBatch,
    val: &AugmentedBatch,
    cfg: &TrainerConfig,
    batch_size: usize,
) -> Result<TrainingReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = WeightMatrix::zeros(train.num_classes(), train.num_aug_features());
    let mut indices: Vec<usize> = (0..train.num_patterns()).collect();
    let mut loss_history = Vec::new();
    let mut train_pe_history = Vec::new();
    let mut val_pe_history = Vec::new();
    let mut stall_iterations = Vec::new();
    let mut best: Option<BestTracker> = None;

    for k in 0..cfg.iterations {
        let scores = forward(&w, train)?;
        let eval = evaluate_objective(&scores, train, cfg)?;
        if !eval.loss.is_finite() {
            return Err(non_finite_loss(k, eval.loss, &w, &scores));
        }
        let train_pe = classification_error(&predict(&scores), train.labels())?;
        let val_pe = evaluate_pe(&w, val)?;
        loss_history.push(eval.loss);
        train_pe_history.push(train_pe);
        val_pe_history.push(val_pe);
        match &mut best {
            None => best = Some(BestTracker::start(k, val_pe, &w)),
            Some(b) => b.observe(k, val_pe, &w),
        }
        if k + 1 == cfg.iterations {
            break;
        }
        indices.shuffle(&mut rng);
        let mut any_step = false;
        for chunk in indices.chunks(batch_size) {
            let sub = train.subset(chunk);
            let sub_scores = forward(&w, &sub)?;
            let sub_eval = evaluate_objective(&sub_scores, &sub, cfg)?;
            if !sub_eval.loss.is_finite() {
                return Err(non_finite_loss(k, sub_eval.loss, &w, &sub_scores));
            }
            let g = gradient(&sub_eval.delta, &sub)?;
            if let Some((w_next, _)) = take_step(&w, &sub_scores, &sub_eval, &g, &sub, cfg)? {
                w = w_next;
                any_step = true;
            }
        }
        if !any_step {
            // Unlike the full-batch case the next epoch sees different
            // chunks, so a stalled epoch is recorded but not terminal.
            stall_iterations.push(k);
        }
    }

    let best = best.expect("at least one iteration ran");
    Ok(TrainingReport {
        loss_history,
        train_pe_history,
        val_pe_history,
        best_val_iteration: best.best_iteration,
        best_weights: best.best_weights,
        final_test_pe: None,
        stall_iterations,
    })
}
