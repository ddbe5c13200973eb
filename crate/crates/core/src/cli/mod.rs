//! Command-line entry point: single runs, the 10-fold benchmark,
//! diagnostics over saved weights, numerical demos of the divergence
//! properties, and a dataset-layout helper.
//!
//! Every command is deterministic given the config it persists: the
//! effective configuration (seed included, auto-generated when absent) is
//! written next to the results as `config.json`, and that file can be fed
//! back through `--config`. Exit codes: 0 on success, 2 for configuration
//! problems, 3 for runtime failures.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{augment, forward};
use crate::data::{self, concat, load_cifar10, load_idx, normalize01, Dataset, NormalizeMode};
use crate::error::{Error, Result};
use crate::eval::{
    diagnose_errors, emit_results, load_weights, make_folds, run_kfold, save_weights,
    write_history, ErrorDiagnostics,
};
use crate::linalg::Matrix;
use crate::losses::mse;
use crate::output_reset::{adjusted_mse, or_type2, OrVariant};
use crate::trainer::{self, evaluate_pe, Algorithm, TrainerConfig};

const DATA_ROOT_ENV: &str = "LCOR_DATA_ROOT";

#[derive(Parser)]
#[command(
    name = "lcor",
    version,
    about = "Train and benchmark regression-based linear classifiers with target adjustment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train once on a deterministic 80/10/10 split and save the report.
    Train(RunArgs),
    /// Run the 10-fold protocol and emit table-shaped results.
    Kfold(RunArgs),
    /// Classify the regression errors of saved weights on a dataset.
    Diagnose(DiagnoseArgs),
    /// Print and save the numerical divergence tables and a 2-D scenario.
    DemoLemmas(DemoArgs),
    /// Check that dataset files are laid out where the loaders expect them.
    PrepareData(PrepareArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat JSON config file; explicit flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset name: synth, mnist, fashion, or cifar10.
    #[arg(long)]
    dataset: Option<String>,
    /// Directory holding the dataset subdirectories (else $LCOR_DATA_ROOT).
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Training algorithm: sce, mse-or, smse-or — or "all" for kfold.
    #[arg(long)]
    algo: Option<String>,
    /// Target adjustment variant: classic, type2, pe, or none.
    #[arg(long)]
    or_variant: Option<String>,
    /// Training iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Target amplitude for the labeled class.
    #[arg(long)]
    b: Option<f64>,
    /// Seed for every shuffle; auto-generated and persisted when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Fold-level worker threads (the results do not depend on this).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only the first n folds of the plan (smoke mode).
    #[arg(long)]
    folds_run: Option<usize>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Weights file produced by `train`.
    #[arg(long)]
    weights: PathBuf,
    /// Dataset to diagnose on (defaults to the one named in the file).
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Slot error magnitude counted as an outlier (default 3·b).
    #[arg(long)]
    outlier_threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PrepareArgs {
    /// Check one dataset (error if incomplete); else survey all of them.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    data_root: Option<PathBuf>,
}

/// The persisted experiment record. Field names double as the accepted
/// config-file keys, so an emitted `config.json` can be replayed with
/// `--config`.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    dataset: Option<String>,
    data_root: Option<String>,
    algo: Option<String>,
    or_variant: Option<String>,
    iters: Option<usize>,
    b: Option<f64>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<String>,
    folds_run: Option<usize>,
    batch_size: Option<usize>,
    or_inner_iterations: Option<usize>,
    normalize: Option<String>,
    smse_summed_delta: Option<bool>,
}

/// Fully resolved settings: flag > config file > default.
#[derive(Debug, Clone)]
struct Resolved {
    dataset: String,
    data_root: Option<PathBuf>,
    algo: String,
    or_variant: Option<OrVariant>,
    or_variant_name: String,
    iters: Option<usize>,
    b: f64,
    seed: u64,
    jobs: usize,
    out: PathBuf,
    folds_run: usize,
    batch_size: Option<usize>,
    or_inner_iterations: usize,
    normalize: Option<NormalizeMode>,
    smse_summed_delta: bool,
}

fn parse_or_variant(s: &str) -> Result<Option<OrVariant>> {
    match s {
        "classic" => Ok(Some(OrVariant::Classic)),
        "type2" => Ok(Some(OrVariant::Type2)),
        "pe" => Ok(Some(OrVariant::PeProportional)),
        "none" => Ok(None),
        other => Err(Error::Config(format!(
            "unknown adjustment variant {other:?}; expected classic, type2, pe, or none"
        ))),
    }
}

fn parse_normalize(s: &str) -> Result<NormalizeMode> {
    match s {
        "byte" => Ok(NormalizeMode::ByteScale),
        "minmax" => Ok(NormalizeMode::MinMax),
        other => Err(Error::Config(format!(
            "unknown normalization {other:?}; expected byte or minmax"
        ))),
    }
}

impl Resolved {
    fn from_args(args: RunArgs) -> Result<Resolved> {
        let file: ConfigDoc = match &args.config {
            Some(path) => {
                let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&body)
                    .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?
            }
            None => ConfigDoc::default(),
        };
        let or_variant_name = args
            .or_variant
            .or(file.or_variant)
            .unwrap_or_else(|| "classic".to_string());
        let or_variant = parse_or_variant(&or_variant_name)?;
        let normalize = file.normalize.as_deref().map(parse_normalize).transpose()?;
        Ok(Resolved {
            dataset: args
                .dataset
                .or(file.dataset)
                .unwrap_or_else(|| "synth".to_string()),
            data_root: args
                .data_root
                .or(file.data_root.map(PathBuf::from))
                .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from)),
            algo: args
                .algo
                .or(file.algo)
                .unwrap_or_else(|| "mse-or".to_string()),
            or_variant,
            or_variant_name,
            iters: args.iters.or(file.iters),
            b: args.b.or(file.b).unwrap_or(1.0),
            seed: args.seed.or(file.seed).unwrap_or_else(rand::random),
            jobs: args.jobs.or(file.jobs).unwrap_or(1),
            out: args
                .out
                .or(file.out.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            folds_run: args.folds_run.or(file.folds_run).unwrap_or(10),
            batch_size: file.batch_size,
            or_inner_iterations: file.or_inner_iterations.unwrap_or(3),
            normalize,
            smse_summed_delta: file.smse_summed_delta.unwrap_or(false),
        })
    }

    fn trainer_config(&self, algorithm: Algorithm) -> TrainerConfig {
        let mut cfg = TrainerConfig::new(algorithm);
        if let Some(iters) = self.iters {
            cfg.iterations = iters;
        }
        cfg.or_variant = self.or_variant;
        cfg.or_inner_iterations = self.or_inner_iterations;
        cfg.b = self.b;
        cfg.seed = self.seed;
        cfg.batch_size = self.batch_size;
        cfg.smse_summed_delta = self.smse_summed_delta;
        cfg
    }

    fn config_doc(&self, algorithm_name: &str) -> ConfigDoc {
        ConfigDoc {
            dataset: Some(self.dataset.clone()),
            data_root: self
                .data_root
                .as_ref()
                .map(|p| p.display().to_string()),
            algo: Some(algorithm_name.to_string()),
            or_variant: Some(self.or_variant_name.clone()),
            iters: self.iters,
            b: Some(self.b),
            seed: Some(self.seed),
            jobs: Some(self.jobs),
            out: Some(self.out.display().to_string()),
            folds_run: Some(self.folds_run),
            batch_size: self.batch_size,
            or_inner_iterations: Some(self.or_inner_iterations),
            normalize: self.normalize.map(|m| {
                match m {
                    NormalizeMode::ByteScale => "byte",
                    NormalizeMode::MinMax => "minmax",
                }
                .to_string()
            }),
            smse_summed_delta: Some(self.smse_summed_delta),
        }
    }

    fn algorithms(&self) -> Result<Vec<Algorithm>> {
        if self.algo == "all" {
            Ok(vec![Algorithm::Sce, Algorithm::MseOr, Algorithm::SmseOr])
        } else {
            Ok(vec![Algorithm::parse(&self.algo)?])
        }
    }
}

/// Expected on-disk layout for each file-backed dataset, relative to the
/// data root.
fn expected_files(dataset: &str) -> Option<Vec<PathBuf>> {
    let root = PathBuf::from(dataset);
    match dataset {
        "mnist" | "fashion" => Some(
            [
                "train-images-idx3-ubyte",
                "train-labels-idx1-ubyte",
                "t10k-images-idx3-ubyte",
                "t10k-labels-idx1-ubyte",
            ]
            .iter()
            .map(|f| root.join(f))
            .collect(),
        ),
        "cifar10" => Some(
            [
                "data_batch_1.bin",
                "data_batch_2.bin",
                "data_batch_3.bin",
                "data_batch_4.bin",
                "data_batch_5.bin",
                "test_batch.bin",
            ]
            .iter()
            .map(|f| root.join(f))
            .collect(),
        ),
        _ => None,
    }
}

fn require_root(resolved_root: &Option<PathBuf>, dataset: &str) -> Result<PathBuf> {
    resolved_root.clone().ok_or_else(|| {
        Error::Config(format!(
            "dataset {dataset} needs a data root; pass --data-root or set ${DATA_ROOT_ENV}"
        ))
    })
}

/// Load and normalize the named dataset. The synthetic corpus needs no
/// files: three 2-D Gaussian classes with fixed parameters.
fn load_dataset(resolved: &Resolved) -> Result<Dataset> {
    let name = resolved.dataset.as_str();
    match name {
        "synth" => {
            let means = vec![vec![0.0, 0.0], vec![2.5, 0.0], vec![0.0, 2.5]];
            let scales = vec![1.0, 1.0, 1.0];
            let raw = data::synth_gaussians(200, &means, &scales, 40);
            Ok(normalize01(
                &raw,
                resolved.normalize.unwrap_or(NormalizeMode::MinMax),
            ))
        }
        "mnist" | "fashion" => {
            let root = require_root(&resolved.data_root, name)?;
            let dir = root.join(name);
            let train = load_idx(
                &dir.join("train-images-idx3-ubyte"),
                &dir.join("train-labels-idx1-ubyte"),
            )?;
            let test = load_idx(
                &dir.join("t10k-images-idx3-ubyte"),
                &dir.join("t10k-labels-idx1-ubyte"),
            )?;
            let joined = concat(name, &[train, test])?;
            Ok(normalize01(
                &joined,
                resolved.normalize.unwrap_or(NormalizeMode::ByteScale),
            ))
        }
        "cifar10" => {
            let root = require_root(&resolved.data_root, name)?;
            let batches: Vec<PathBuf> = expected_files("cifar10")
                .expect("cifar10 is file-backed")
                .iter()
                .map(|rel| root.join(rel))
                .collect();
            let raw = load_cifar10(&batches)?;
            Ok(normalize01(
                &raw,
                resolved.normalize.unwrap_or(NormalizeMode::ByteScale),
            ))
        }
        other => Err(Error::Config(format!(
            "unknown dataset {other:?}; expected synth, mnist, fashion, or cifar10"
        ))),
    }
}

/// Deterministic 80/10/10 split: one seeded shuffle, cut into test (first
/// tenth), validation (second tenth), training (rest), each reported in
/// ascending pattern order.
fn split_80_10_10(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let tenth = n / 10;
    let mut test: Vec<usize> = order[..tenth].to_vec();
    let mut val: Vec<usize> = order[tenth..2 * tenth].to_vec();
    let mut train: Vec<usize> = order[2 * tenth..].to_vec();
    test.sort_unstable();
    val.sort_unstable();
    train.sort_unstable();
    (train, val, test)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    Ok(())
}

type CmdResult = std::result::Result<(), (i32, Error)>;

fn config_phase<T>(r: Result<T>) -> std::result::Result<T, (i32, Error)> {
    r.map_err(|e| (2, e))
}

fn runtime_phase<T>(r: Result<T>) -> std::result::Result<T, (i32, Error)> {
    r.map_err(|e| (3, e))
}

fn cmd_train(args: RunArgs) -> CmdResult {
    let resolved = config_phase(Resolved::from_args(args))?;
    let algorithms = config_phase(resolved.algorithms())?;
    let [algorithm] = algorithms.as_slice() else {
        return Err((
            2,
            Error::Config("train takes a single --algo, not \"all\"".to_string()),
        ));
    };
    let cfg = resolved.trainer_config(*algorithm);
    config_phase(cfg.validate())?;
    let dataset = config_phase(load_dataset(&resolved))?;

    let (train_idx, val_idx, test_idx) = split_80_10_10(dataset.num_patterns(), resolved.seed);
    let train_batch = config_phase(augment(&dataset.subset(&train_idx), cfg.b))?;
    let val_batch = config_phase(augment(&dataset.subset(&val_idx), cfg.b))?;
    let test_batch = config_phase(augment(&dataset.subset(&test_idx), cfg.b))?;

    let report = runtime_phase(trainer::train(&train_batch, &val_batch, &cfg))?;
    let test_pe = runtime_phase(evaluate_pe(&report.best_weights, &test_batch))? * 100.0;

    runtime_phase(
        fs::create_dir_all(&resolved.out).map_err(|e| Error::io(&resolved.out, e)),
    )?;
    runtime_phase(write_json(
        &resolved.out.join("config.json"),
        &resolved.config_doc(algorithm.name()),
    ))?;
    runtime_phase(write_history(&resolved.out.join("history.csv"), &report))?;
    runtime_phase(save_weights(
        &resolved.out.join("weights.json"),
        dataset.name(),
        algorithm.name(),
        cfg.b,
        &report.best_weights,
    ))?;
    runtime_phase(write_json(
        &resolved.out.join("report.json"),
        &serde_json::json!({
            "dataset": dataset.name(),
            "algorithm": algorithm.name(),
            "or_variant": resolved.or_variant_name,
            "seed": resolved.seed,
            "iterations_run": report.loss_history.len(),
            "best_val_iteration": report.best_val_iteration,
            "best_val_pe_percent": report.val_pe_history[report.best_val_iteration] * 100.0,
            "test_pe_percent": test_pe,
            "stall_iterations": report.stall_iterations,
        }),
    ))?;

    println!(
        "{} on {}: {} iteration(s), best validation at iteration {}, test PE {:.4}%",
        algorithm.name(),
        dataset.name(),
        report.loss_history.len(),
        report.best_val_iteration,
        test_pe
    );
    println!("results in {}", resolved.out.display());
    Ok(())
}

fn cmd_kfold(args: RunArgs) -> CmdResult {
    let resolved = config_phase(Resolved::from_args(args))?;
    let algorithms = config_phase(resolved.algorithms())?;
    if resolved.folds_run == 0 || resolved.folds_run > 10 {
        return Err((
            2,
            Error::Config(format!(
                "--folds-run must be between 1 and 10, got {}",
                resolved.folds_run
            )),
        ));
    }
    let dataset = config_phase(load_dataset(&resolved))?;
    let plan = config_phase(make_folds(dataset.num_patterns(), 10, resolved.seed))?;

    let mut algo_results = BTreeMap::new();
    for algorithm in algorithms {
        let cfg = resolved.trainer_config(algorithm);
        config_phase(cfg.validate())?;
        let result = runtime_phase(run_kfold(
            &dataset,
            &cfg,
            &plan,
            resolved.folds_run,
            resolved.jobs,
        ))?;
        println!(
            "{} on {}: avg test PE {:.4}% over {} fold(s), best avg val iteration {:.1}",
            algorithm.name(),
            dataset.name(),
            result.average_testing_pe,
            result.folds_run,
            result.best_average_validation_iteration
        );
        algo_results.insert(algorithm.name().to_string(), result);
    }

    let mut results = BTreeMap::new();
    results.insert(dataset.name().to_string(), algo_results);
    runtime_phase(
        fs::create_dir_all(&resolved.out).map_err(|e| Error::io(&resolved.out, e)),
    )?;
    runtime_phase(write_json(
        &resolved.out.join("config.json"),
        &resolved.config_doc(&resolved.algo),
    ))?;
    let written = runtime_phase(emit_results(&results, &resolved.out))?;
    println!("{} file(s) in {}", written.len() + 1, resolved.out.display());
    Ok(())
}

fn render_diagnostics(diag: &ErrorDiagnostics, dataset: &str, algorithm: &str) -> String {
    let total = diag.total_slots() as f64;
    let pct = |n: usize| 100.0 * n as f64 / total;
    let mut sorted_bias = diag.pattern_bias.clone();
    sorted_bias.sort_by(|a, b| a.partial_cmp(b).expect("bias magnitudes are finite"));
    let quantile = |q: f64| {
        if sorted_bias.is_empty() {
            0.0
        } else {
            sorted_bias[((sorted_bias.len() - 1) as f64 * q).round() as usize]
        }
    };
    let mut text = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(text, "Error diagnostics: {algorithm} weights on {dataset}");
    let _ = writeln!(
        text,
        "  patterns: {}   classes: {}   output slots: {}",
        diag.num_patterns,
        diag.num_classes,
        diag.total_slots()
    );
    let _ = writeln!(
        text,
        "  consistent slots:   {:>10}  ({:.2}%)  — discrepancies the decision rule feels",
        diag.consistent_slots,
        pct(diag.consistent_slots)
    );
    let _ = writeln!(
        text,
        "  inconsistent slots: {:>10}  ({:.2}%)  — harmless overshoot/undershoot",
        diag.inconsistent_slots,
        pct(diag.inconsistent_slots)
    );
    let _ = writeln!(
        text,
        "  zero-error slots:   {:>10}  ({:.2}%)",
        diag.zero_error_slots,
        pct(diag.zero_error_slots)
    );
    let _ = writeln!(
        text,
        "  outlier slots (|error| > {}): {}",
        diag.outlier_threshold, diag.outlier_slots
    );
    let _ = writeln!(
        text,
        "  pattern bias |m_y - m_t|: mean {:.6}, median {:.6}, p90 {:.6}, max {:.6}",
        diag.pattern_bias_mean(),
        quantile(0.5),
        quantile(0.9),
        diag.pattern_bias_max()
    );
    let _ = writeln!(text, "  per class (label: consistent/inconsistent/zero/outlier):");
    for (label, counts) in diag.per_class.iter().enumerate() {
        let _ = writeln!(
            text,
            "    {label}: {}/{}/{}/{}",
            counts.consistent, counts.inconsistent, counts.zero_error, counts.outlier
        );
    }
    text
}

fn cmd_diagnose(args: DiagnoseArgs) -> CmdResult {
    let saved = config_phase(load_weights(&args.weights))?;
    let resolved = config_phase(Resolved::from_args(RunArgs {
        dataset: args.dataset.or(Some(saved.dataset.clone())),
        data_root: args.data_root,
        b: Some(saved.b),
        out: args.out,
        ..RunArgs::default()
    }))?;
    let dataset = config_phase(load_dataset(&resolved))?;
    let batch = config_phase(augment(&dataset, saved.b))?;

    let expected_rows = batch.num_classes();
    let expected_cols = batch.num_aug_features();
    let w = &saved.weights;
    if w.num_classes() != expected_rows || w.num_aug_features() != expected_cols {
        return Err((
            2,
            Error::WeightsShape {
                expected_rows,
                expected_cols,
                found_rows: w.num_classes(),
                found_cols: w.num_aug_features(),
            },
        ));
    }

    let threshold = args.outlier_threshold.unwrap_or(3.0 * saved.b);
    let y = runtime_phase(forward(w, &batch))?;
    let diag = runtime_phase(diagnose_errors(
        &y,
        batch.targets(),
        batch.labels(),
        threshold,
    ))?;
    let text = render_diagnostics(&diag, dataset.name(), &saved.algorithm);
    print!("{text}");
    runtime_phase(
        fs::create_dir_all(&resolved.out).map_err(|e| Error::io(&resolved.out, e)),
    )?;
    let path = resolved.out.join("diagnostics.txt");
    runtime_phase(fs::write(&path, &text).map_err(|e| Error::io(&path, e)))?;
    println!("written to {}", path.display());
    Ok(())
}

/// Evaluate the raw and adjusted risks of a single two-output pattern with
/// the labeled-class output swept over huge magnitudes, exercising the
/// actual loss and adjustment code paths.
fn divergence_tables() -> Result<String> {
    let mut text = String::new();
    use std::fmt::Write as _;

    let risk = |y_c: f64, y_d: f64| -> Result<(f64, f64)> {
        let y = Matrix::from_vec(1, 2, vec![y_c, y_d])?;
        let t = Matrix::from_vec(1, 2, vec![1.0, 0.0])?;
        let raw = mse(&y, &t)?.value;
        let adjusted = adjusted_mse(&y, &or_type2(&y, &t, &[0])?)?.value;
        Ok((raw, adjusted))
    };

    let _ = writeln!(
        text,
        "Raw squared error diverges with output magnitude (targets [1, 0], other output 0.3):"
    );
    let _ = writeln!(text, "  {:>12}  {:>16}  {:>16}", "y(correct)", "E", "E' (clamped)");
    for magnitude in [10.0, 1e3, 1e6] {
        for y_c in [magnitude, -magnitude] {
            let (raw, adjusted) = risk(y_c, 0.3)?;
            let _ = writeln!(text, "  {y_c:>12e}  {raw:>16.6e}  {adjusted:>16.6e}");
        }
    }
    let (_, e_o) = risk(1.0, 0.3)?;
    let _ = writeln!(
        text,
        "  E grows without bound in both directions; the clamped risk stays at E_o = {e_o} \
         for positive overshoot and diverges only when the labeled output collapses."
    );

    let _ = writeln!(text);
    let _ = writeln!(
        text,
        "Same sweep on the wrong-class output (labeled output fixed at 0.9):"
    );
    let _ = writeln!(text, "  {:>12}  {:>16}  {:>16}", "y(wrong)", "E", "E' (clamped)");
    for magnitude in [10.0, 1e3, 1e6] {
        for y_d in [magnitude, -magnitude] {
            let y = Matrix::from_vec(1, 2, vec![0.9, y_d])?;
            let t = Matrix::from_vec(1, 2, vec![1.0, 0.0])?;
            let raw = mse(&y, &t)?.value;
            let adjusted = adjusted_mse(&y, &or_type2(&y, &t, &[0])?)?.value;
            let _ = writeln!(text, "  {y_d:>12e}  {raw:>16.6e}  {adjusted:>16.6e}");
        }
    }
    let _ = writeln!(
        text,
        "  Undershoot on a wrong class is harmless after clamping (E' -> E_o = 0.01); \
         overshoot still diverges, as it must — it can change the decision."
    );
    Ok(text)
}

fn cmd_demo_lemmas(args: DemoArgs) -> CmdResult {
    let out = args.out.unwrap_or_else(|| PathBuf::from("out"));
    let mut text = runtime_phase(divergence_tables())?;

    // A small 2-class, 2-D scenario: train the correlation trainer and
    // report the boundary between the two discriminants plus the margin
    // lines, the geometry the adjustment reasons about.
    let means = vec![vec![-2.0, 0.0], vec![2.0, 0.0]];
    let scales = vec![0.35, 0.35];
    let raw = data::synth_gaussians(60, &means, &scales, 17);
    let dataset = normalize01(&raw, NormalizeMode::MinMax);
    let batch = runtime_phase(augment(&dataset, 1.0))?;
    let mut cfg = TrainerConfig::new(Algorithm::MseOr);
    cfg.iterations = 30;
    let report = runtime_phase(trainer::train(&batch, &batch, &cfg))?;
    let w = report.best_weights.matrix();
    let d: Vec<f64> = (0..3).map(|j| w.get(0, j) - w.get(1, j)).collect();
    {
        use std::fmt::Write as _;
        let _ = writeln!(text);
        let _ = writeln!(text, "2-D scenario (two classes, correlation trainer, 30 rounds):");
        let _ = writeln!(
            text,
            "  final train PE: {:.2}%",
            report.train_pe_history.last().unwrap() * 100.0
        );
        let _ = writeln!(
            text,
            "  class boundary: {:.6} + {:.6}*x1 + {:.6}*x2 = 0",
            d[0], d[1], d[2]
        );
        let _ = writeln!(
            text,
            "  margin lines: w0.x_a = 1 with w0 = [{:.6}, {:.6}, {:.6}]; \
             w1.x_a = 0 with w1 = [{:.6}, {:.6}, {:.6}]",
            w.get(0, 0),
            w.get(0, 1),
            w.get(0, 2),
            w.get(1, 0),
            w.get(1, 1),
            w.get(1, 2)
        );
        let _ = writeln!(text, "  points in scenario_points.csv");
    }

    print!("{text}");
    runtime_phase(fs::create_dir_all(&out).map_err(|e| Error::io(&out, e)))?;
    let lemmas_path = out.join("lemmas.txt");
    runtime_phase(fs::write(&lemmas_path, &text).map_err(|e| Error::io(&lemmas_path, e)))?;

    let points_path = out.join("scenario_points.csv");
    let write_points = || -> Result<()> {
        let mut w = csv::Writer::from_path(&points_path).map_err(Error::Csv)?;
        w.write_record(["x1", "x2", "label"])?;
        for p in 0..dataset.num_patterns() {
            w.write_record([
                format!("{}", dataset.features().get(p, 0)),
                format!("{}", dataset.features().get(p, 1)),
                dataset.labels()[p].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&points_path, e))?;
        Ok(())
    };
    runtime_phase(write_points())?;
    runtime_phase(save_weights(
        &out.join("scenario_weights.json"),
        dataset.name(),
        Algorithm::MseOr.name(),
        1.0,
        &report.best_weights,
    ))?;
    println!("written to {}", out.display());
    Ok(())
}

fn cmd_prepare_data(args: PrepareArgs) -> CmdResult {
    let root = args
        .data_root
        .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from));
    let datasets: Vec<&str> = match args.dataset.as_deref() {
        Some("synth") => {
            println!("synth: generated on the fly, nothing to prepare");
            return Ok(());
        }
        Some(name) => {
            if expected_files(name).is_none() {
                return Err((
                    2,
                    Error::Config(format!(
                        "unknown dataset {name:?}; expected synth, mnist, fashion, or cifar10"
                    )),
                ));
            }
            vec![name]
        }
        None => vec!["mnist", "fashion", "cifar10"],
    };
    let Some(root) = root else {
        return Err((
            2,
            Error::Config(format!(
                "no data root; pass --data-root or set ${DATA_ROOT_ENV}"
            )),
        ));
    };

    let mut missing_any = false;
    println!("data root: {}", root.display());
    for dataset in &datasets {
        println!("{dataset}:");
        for rel in expected_files(dataset).expect("file-backed datasets only") {
            let path = root.join(&rel);
            match fs::metadata(&path) {
                Ok(meta) => println!("  ok      {} ({} bytes)", rel.display(), meta.len()),
                Err(_) => {
                    missing_any = true;
                    println!("  missing {}", path.display());
                }
            }
        }
    }
    if missing_any && args.dataset.is_some() {
        return Err((
            2,
            Error::Config(format!(
                "dataset {} is incomplete under {}",
                datasets[0],
                root.display()
            )),
        ));
    }
    if missing_any {
        println!("some files are missing; place them as listed above");
    } else {
        println!("all files present");
    }
    Ok(())
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text and distinguishes
            // display-only exits (help, version) from real usage errors.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Kfold(args) => cmd_kfold(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::DemoLemmas(args) => cmd_demo_lemmas(args),
        Command::PrepareData(args) => cmd_prepare_data(args),
    };
    match outcome {
        Ok(()) => 0,
        Err((code, e)) => {
            eprintln!("error: {e}");
            code
        }
    }
}
