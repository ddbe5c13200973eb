use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::WeightMatrix;
use crate::error::{Error, Result};
use crate::eval::KFoldResult;
use crate::linalg::Matrix;
use crate::trainer::TrainingReport;

/// Format a float with the shortest representation that parses back to the
/// identical bits, so emitted CSV survives a round-trip exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Write one training run's per-iteration curves. Loss is recorded as-is;
/// error rates are written in percent to match the result tables.
pub fn write_history(path: &Path, report: &TrainingReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(Error::Csv)?;
    w.write_record(["iteration", "loss", "train_pe", "val_pe"])?;
    for k in 0..report.loss_history.len() {
        w.write_record([
            k.to_string(),
            fmt_f64(report.loss_history[k]),
            fmt_f64(report.train_pe_history[k] * 100.0),
            fmt_f64(report.val_pe_history[k] * 100.0),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Emit the table-shaped results for a benchmark run into `dir`:
/// `results.csv` with one summary row and one detail row per fold for every
/// dataset/algorithm pair, `summary.txt` mirroring the table layout, and a
/// per-fold history CSV for plotting. Returns the paths written.
pub fn emit_results(
    results: &BTreeMap<String, BTreeMap<String, KFoldResult>>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if results.is_empty() || results.values().all(|algos| algos.is_empty()) {
        return Err(Error::NoResults);
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let results_path = dir.join("results.csv");
    {
        let mut w = csv::Writer::from_path(&results_path).map_err(Error::Csv)?;
        w.write_record([
            "dataset",
            "algorithm",
            "row_type",
            "fold",
            "testing_pe",
            "best_val_iteration",
            "folds_run",
        ])?;
        for (dataset, algos) in results {
            for (algorithm, result) in algos {
                w.write_record([
                    dataset.as_str(),
                    algorithm.as_str(),
                    "summary",
                    "",
                    &fmt_f64(result.average_testing_pe),
                    &fmt_f64(result.best_average_validation_iteration),
                    &result.folds_run.to_string(),
                ])?;
                for (f, report) in result.per_fold.iter().enumerate() {
                    let test_pe = report
                        .final_test_pe
                        .map(fmt_f64)
                        .unwrap_or_default();
                    w.write_record([
                        dataset.as_str(),
                        algorithm.as_str(),
                        "fold",
                        &f.to_string(),
                        &test_pe,
                        &report.best_val_iteration.to_string(),
                        &result.folds_run.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(&results_path, e))?;
    }
    written.push(results_path);

    let summary_path = dir.join("summary.txt");
    let mut text = String::new();
    for (dataset, algos) in results {
        let _ = writeln!(text, "Dataset: {dataset}");
        let _ = writeln!(
            text,
            "  {:<10} {:>18} {:>28}",
            "algorithm", "avg test PE (%)", "best avg val iteration"
        );
        for (algorithm, result) in algos {
            let _ = writeln!(
                text,
                "  {:<10} {:>18.4} {:>28.1}{}",
                algorithm,
                result.average_testing_pe,
                result.best_average_validation_iteration,
                if result.folds_run < 10 {
                    format!("   ({} fold(s) only)", result.folds_run)
                } else {
                    String::new()
                }
            );
        }
        text.push('\n');
    }
    fs::write(&summary_path, text).map_err(|e| Error::io(&summary_path, e))?;
    written.push(summary_path);

    for (dataset, algos) in results {
        for (algorithm, result) in algos {
            for (f, report) in result.per_fold.iter().enumerate() {
                let path = dir.join(format!("{dataset}_{algorithm}_fold{f}_history.csv"));
                write_history(&path, report)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightsFile {
    dataset: String,
    algorithm: String,
    b: f64,
    rows: usize,
    cols: usize,
    weights: Vec<Vec<f64>>,
}

/// A weight matrix loaded back from disk together with the context it was
/// trained under.
#[derive(Debug)]
pub struct SavedWeights {
    pub dataset: String,
    pub algorithm: String,
    pub b: f64,
    pub weights: WeightMatrix,
}

pub fn save_weights(
    path: &Path,
    dataset: &str,
    algorithm: &str,
    b: f64,
    w: &WeightMatrix,
) -> Result<()> {
    let m = w.matrix();
    let file = WeightsFile {
        dataset: dataset.to_string(),
        algorithm: algorithm.to_string(),
        b,
        rows: m.rows(),
        cols: m.cols(),
        weights: (0..m.rows()).map(|r| m.row(r).to_vec()).collect(),
    };
    let body = serde_json::to_string_pretty(&file)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<SavedWeights> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: WeightsFile = serde_json::from_str(&body)?;
    let found_rows = file.weights.len();
    let found_cols = file.weights.first().map_or(0, Vec::len);
    let consistent = found_rows == file.rows
        && file.weights.iter().all(|row| row.len() == file.cols);
    if !consistent {
        return Err(Error::WeightsShape {
            expected_rows: file.rows,
            expected_cols: file.cols,
            found_rows,
            found_cols,
        });
    }
    let weights = WeightMatrix::new(Matrix::from_rows(&file.weights)?)?;
    Ok(SavedWeights {
        dataset: file.dataset,
        algorithm: file.algorithm,
        b: file.b,
        weights,
    })
}
