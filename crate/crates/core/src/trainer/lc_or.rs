use crate::classifier::{classification_error, forward, predict, AugmentedBatch, WeightMatrix};
use crate::error::{Error, Result};
use crate::linalg::OlsSolver;
use crate::losses::mse;
use crate::output_reset::adjusted_mse;
use crate::trainer::{
    accumulate_correlations, apply_or, cross_correlation, evaluate_pe, Algorithm, BestTracker,
    TrainerConfig, TrainingReport,
};

/// An adjusted error at or below this counts as zero empirical risk and
/// halts training: the targets have converged onto the outputs.
const ZERO_RISK: f64 = 1e-10;

/// Correlation-based training: start from the least-squares solution, then
/// alternate between adjusting targets toward the current outputs and
/// re-solving the normal equations for the adjusted targets.
///
/// The autocorrelation R depends only on the inputs, so it is accumulated
/// and factored exactly once; each outer iteration pays only a
/// cross-correlation rebuild and a back-substitution. Solver failures carry
/// the index of the iteration whose weights were being produced.
pub fn train_lc_or(
    train: &AugmentedBatch,
    val: &AugmentedBatch,
    cfg: &TrainerConfig,
) -> Result<TrainingReport> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::MseOr {
        return Err(Error::Config(format!(
            "train_lc_or handles the mse-or algorithm, got {}",
            cfg.algorithm.name()
        )));
    }
    let at_iteration = |iteration: usize| {
        move |e: Error| Error::Trainer {
            iteration,
            source: Box::new(e),
        }
    };
    let pair = accumulate_correlations(train, train.targets())?;
    let solver = OlsSolver::with_policy(&pair.r, cfg.ridge_policy).map_err(at_iteration(0))?;
    let mut w = WeightMatrix::new(solver.solve(&pair.c).map_err(at_iteration(0))?)?;

    let mut loss_history = Vec::new();
    let mut train_pe_history = Vec::new();
    let mut val_pe_history = Vec::new();
    let mut best: Option<BestTracker> = None;

    for k in 0..cfg.iterations {
        let y = forward(&w, train)?;
        let (loss, t_prime) = match cfg.or_variant {
            Some(variant) => {
                let adj = apply_or(variant, &y, train.targets(), train.labels(), cfg)?;
                let loss = adjusted_mse(&y, &adj)?.value;
                (loss, Some(adj.into_t_prime()))
            }
            None => (mse(&y, train.targets())?.value, None),
        };
        let train_pe = classification_error(&predict(&y), train.labels())?;
        let val_pe = evaluate_pe(&w, val)?;
        loss_history.push(loss);
        train_pe_history.push(train_pe);
        val_pe_history.push(val_pe);
        match &mut best {
            None => best = Some(BestTracker::start(k, val_pe, &w)),
            Some(b) => b.observe(k, val_pe, &w),
        }
        if loss <= ZERO_RISK || k + 1 == cfg.iterations {
            break;
        }
        let c = match &t_prime {
            Some(tp) => cross_correlation(train, tp)?,
            None => pair.c.clone(),
        };
        w = WeightMatrix::new(solver.solve(&c).map_err(at_iteration(k + 1))?)?;
    }

    let best = best.expect("at least one iteration ran");
    Ok(TrainingReport {
        loss_history,
        train_pe_history,
        val_pe_history,
        best_val_iteration: best.best_iteration,
        best_weights: best.best_weights,
        final_test_pe: None,
        stall_iterations: Vec::new(),
    })
}
