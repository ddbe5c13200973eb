//! The benchmark protocol: deterministic 10-fold partitioning with one test
//! fold, two validation folds, and seven training folds per rotation, plus
//! aggregation of the per-fold reports into table-shaped results.

mod diagnostics;
mod report;

pub use diagnostics::{diagnose_errors, ClassSlotCounts, ErrorDiagnostics};
pub use report::{emit_results, load_weights, save_weights, write_history, SavedWeights};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::augment;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::trainer::{evaluate_pe, train, TrainerConfig, TrainingReport};

/// A deterministic partition of `n` patterns into `k` folds of near-equal
/// size, derived from one seeded shuffle.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    fold_assignment: Vec<usize>,
    num_folds: usize,
    seed: u64,
}

/// Pattern indices for one rotation of the protocol, each list in ascending
/// pattern order.
#[derive(Debug, Clone)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldPlan {
    /// Per-pattern fold index, each in `[0, num_folds)`.
    pub fn fold_assignment(&self) -> &[usize] {
        &self.fold_assignment
    }

    pub fn num_folds(&self) -> usize {
        self.num_folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_patterns(&self) -> usize {
        self.fold_assignment.len()
    }

    /// Patterns assigned to fold `f`, in ascending order.
    pub fn fold_indices(&self, f: usize) -> Vec<usize> {
        assert!(f < self.num_folds, "fold {f} out of range");
        (0..self.fold_assignment.len())
            .filter(|&p| self.fold_assignment[p] == f)
            .collect()
    }

    /// The rotation for test fold `f`: the two cyclically following folds
    /// validate and the remaining folds train.
    pub fn splits(&self, f: usize) -> SplitIndices {
        assert!(f < self.num_folds, "fold {f} out of range");
        let v1 = (f + 1) % self.num_folds;
        let v2 = (f + 2) % self.num_folds;
        let mut split = SplitIndices {
            train: Vec::new(),
            val: Vec::new(),
            test: Vec::new(),
        };
        for (p, &fold) in self.fold_assignment.iter().enumerate() {
            if fold == f {
                split.test.push(p);
            } else if fold == v1 || fold == v2 {
                split.val.push(p);
            } else {
                split.train.push(p);
            }
        }
        split
    }
}

/// Shuffle `0..n` once and cut the shuffled order into `k` contiguous
/// chunks; the first `n mod k` folds absorb the remainder, so fold sizes
/// differ by at most one.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 4 {
        return Err(Error::Config(format!(
            "{k} folds cannot provide disjoint train/validation/test splits; need at least 4"
        )));
    }
    if n < k {
        return Err(Error::Config(format!(
            "{n} patterns cannot fill {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut fold_assignment = vec![0usize; n];
    let mut cursor = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &p in &order[cursor..cursor + size] {
            fold_assignment[p] = f;
        }
        cursor += size;
    }
    Ok(FoldPlan {
        fold_assignment,
        num_folds: k,
        seed,
    })
}

/// Aggregated outcome of running the protocol.
#[derive(Debug, Clone)]
pub struct KFoldResult {
    /// One report per fold actually run, in fold order, each with its
    /// held-out test error filled in (percent).
    pub per_fold: Vec<TrainingReport>,
    /// Mean of the per-fold test errors, in percent.
    pub average_testing_pe: f64,
    /// Mean of the per-fold best-validation iteration indices.
    pub best_average_validation_iteration: f64,
    /// How many folds were run (fewer than the plan's folds in smoke mode).
    pub folds_run: usize,
}

fn run_fold(d: &Dataset, cfg: &TrainerConfig, plan: &FoldPlan, f: usize) -> Result<TrainingReport> {
    let inner = |_: ()| -> Result<TrainingReport> {
        let split = plan.splits(f);
        let train_batch = augment(&d.subset(&split.train), cfg.b)?;
        let val_batch = augment(&d.subset(&split.val), cfg.b)?;
        let test_batch = augment(&d.subset(&split.test), cfg.b)?;
        let mut report = train(&train_batch, &val_batch, cfg)?;
        let test_pe = evaluate_pe(&report.best_weights, &test_batch)?;
        report.final_test_pe = Some(test_pe * 100.0);
        Ok(report)
    };
    inner(()).map_err(|e| Error::Fold {
        fold: f,
        source: Box::new(e),
    })
}

/// Run the first `folds_run` rotations of the plan and aggregate. Folds are
/// independent; with `jobs > 1` they execute on that many threads, and the
/// aggregation is a fold-ordered reduce either way, so the result does not
/// depend on `jobs`.
pub fn run_kfold(
    d: &Dataset,
    cfg: &TrainerConfig,
    plan: &FoldPlan,
    folds_run: usize,
    jobs: usize,
) -> Result<KFoldResult> {
    cfg.validate()?;
    if !d.is_normalized() {
        return Err(Error::Config(format!(
            "dataset {} must be normalized before the protocol runs",
            d.name()
        )));
    }
    if plan.num_patterns() != d.num_patterns() {
        return Err(Error::Config(format!(
            "fold plan covers {} patterns but dataset {} has {}",
            plan.num_patterns(),
            d.name(),
            d.num_patterns()
        )));
    }
    if folds_run == 0 || folds_run > plan.num_folds() {
        return Err(Error::Config(format!(
            "folds_run must be in [1, {}], got {folds_run}",
            plan.num_folds()
        )));
    }
    if jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".to_string()));
    }

    let per_fold = if jobs == 1 {
        let mut reports = Vec::with_capacity(folds_run);
        for f in 0..folds_run {
            reports.push(run_fold(d, cfg, plan, f)?);
        }
        reports
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<TrainingReport>>>> =
            Mutex::new((0..folds_run).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(folds_run) {
                scope.spawn(|| loop {
                    let f = next.fetch_add(1, Ordering::Relaxed);
                    if f >= folds_run {
                        break;
                    }
                    let outcome = run_fold(d, cfg, plan, f);
                    slots.lock().expect("fold slot lock").get_mut(f).map(|s| *s = Some(outcome));
                });
            }
        });
        let collected = slots.into_inner().expect("fold slot lock");
        let mut reports = Vec::with_capacity(folds_run);
        for slot in collected {
            reports.push(slot.expect("every fold was claimed by a worker")?);
        }
        reports
    };

    let sum_pe: f64 = per_fold
        .iter()
        .map(|r| r.final_test_pe.expect("run_fold fills the test error"))
        .sum();
    let sum_best: f64 = per_fold.iter().map(|r| r.best_val_iteration as f64).sum();
    let count = per_fold.len() as f64;
    Ok(KFoldResult {
        average_testing_pe: sum_pe / count,
        best_average_validation_iteration: sum_best / count,
        folds_run,
        per_fold,
    })
}
