//! Objective functions and their analytic per-pattern error signals: plain
//! and adjusted MSE, softmax cross-entropy, sigmoid-MSE, and the Δ formulas
//! the gradient trainers consume.
//!
//! Sign convention, fixed here once for all trainers: Δ is ∂(per-pattern
//! loss)/∂z at the pre-activation, so the weight update is always
//! `W ← W − z·G` with `G = (1/N_v)·Δᵀ·X_a`.

use crate::classifier::AugmentedBatch;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A loss value together with the per-pattern contributions it was reduced
/// from. `value` is always the mean of `per_pattern` when present — both are
/// computed from the same summation, so the invariant holds by construction.
#[derive(Debug, Clone)]
pub struct LossValue {
    pub value: f64,
    pub per_pattern: Option<Vec<f64>>,
}

impl LossValue {
    fn from_per_pattern(per_pattern: Vec<f64>) -> Self {
        let value = per_pattern.iter().sum::<f64>() / per_pattern.len() as f64;
        LossValue {
            value,
            per_pattern: Some(per_pattern),
        }
    }
}

/// Per-output error signal ∂(per-pattern loss)/∂z, N_v × M — the same shape
/// as the discriminants it was computed from.
pub type ErrorSignal = Matrix;

/// Mean squared error: E = (1/N_v)·Σ_p Σ_i (t_p(i) − y_p(i))². With adjusted
/// targets t′ in place of t this is the adjusted error E′.
pub fn mse(y: &Matrix, t: &Matrix) -> Result<LossValue> {
    if y.rows() != t.rows() || y.cols() != t.cols() {
        return Err(Error::DimensionMismatch {
            op: "mse",
            left_rows: y.rows(),
            left_cols: y.cols(),
            right_rows: t.rows(),
            right_cols: t.cols(),
        });
    }
    let mut per_pattern = Vec::with_capacity(y.rows());
    for p in 0..y.rows() {
        let mut acc = 0.0;
        for (yv, tv) in y.row(p).iter().zip(t.row(p)) {
            let e = tv - yv;
            acc += e * e;
        }
        per_pattern.push(acc);
    }
    Ok(LossValue::from_per_pattern(per_pattern))
}

/// Softmax of one score row, computed with max-subtraction so huge scores
/// cannot overflow.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut out: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for q in &mut out {
        *q /= sum;
    }
    out
}

/// Row-wise softmax of a score matrix.
pub fn softmax_rows(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for p in 0..out.rows() {
        let row = softmax(z.row(p));
        out.row_mut(p).copy_from_slice(&row);
    }
    out
}

/// Mean cross-entropy −log q(c_n|x_n) over patterns. Probabilities are
/// clamped to ≥ 1e-15 before the log so a confidently wrong row yields a
/// large finite loss instead of −∞.
pub fn cross_entropy(q: &Matrix, labels: &[usize]) -> Result<LossValue> {
    if q.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: q.rows(),
            right: labels.len(),
        });
    }
    let mut per_pattern = Vec::with_capacity(q.rows());
    for (p, &label) in labels.iter().enumerate() {
        if label >= q.cols() {
            return Err(Error::LabelOutOfRange {
                row: p,
                label,
                num_classes: q.cols(),
            });
        }
        debug_assert!(
            (q.row(p).iter().sum::<f64>() - 1.0).abs() < 1e-6,
            "cross_entropy expects probability rows"
        );
        per_pattern.push(-q.get(p, label).max(1e-15).ln());
    }
    Ok(LossValue::from_per_pattern(per_pattern))
}

/// Logistic sigmoid, branch-stable for large |z|.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Element-wise sigmoid of a score matrix.
pub fn sigmoid_rows(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for v in out.data_mut() {
        *v = sigmoid(*v);
    }
    out
}

/// Cross-entropy error signal through softmax: Δ(c) = q(c) − δ(c, c_n).
pub fn delta_ce(q: &Matrix, labels: &[usize]) -> Result<ErrorSignal> {
    if q.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: q.rows(),
            right: labels.len(),
        });
    }
    let mut delta = q.clone();
    for (p, &label) in labels.iter().enumerate() {
        if label >= q.cols() {
            return Err(Error::LabelOutOfRange {
                row: p,
                label,
                num_classes: q.cols(),
            });
        }
        let v = delta.get(p, label);
        delta.set(p, label, v - 1.0);
    }
    Ok(delta)
}

/// MSE-through-sigmoid error signal, per-output chain rule:
/// Δ(c) = −2·(t_c − y_c)·y_c·(1 − y_c).
///
/// Accepts the closed interval [0, 1]: in doubles the sigmoid saturates to
/// exactly 0.0 or 1.0 for |z| ≳ 37, where the derivative is simply zero.
pub fn delta_mse_sigmoid(y: &Matrix, t: &Matrix) -> Result<ErrorSignal> {
    check_sigmoid_range(y)?;
    if y.rows() != t.rows() || y.cols() != t.cols() {
        return Err(Error::DimensionMismatch {
            op: "delta_mse_sigmoid",
            left_rows: y.rows(),
            left_cols: y.cols(),
            right_rows: t.rows(),
            right_cols: t.cols(),
        });
    }
    let mut delta = Matrix::zeros(y.rows(), y.cols());
    for p in 0..y.rows() {
        let yr = y.row(p);
        let tr = t.row(p);
        let dr = delta.row_mut(p);
        for c in 0..yr.len() {
            dr[c] = -2.0 * (tr[c] - yr[c]) * yr[c] * (1.0 - yr[c]);
        }
    }
    Ok(delta)
}

/// The literal summed form of the sigmoid-MSE error signal:
/// Δ(c) = −2·y_c·(1 − y_c)·Σ_i (t_i − y_i).
///
/// Kept for study behind a trainer flag; it does not match finite
/// differences of the MSE∘sigmoid loss, so the per-output form
/// [`delta_mse_sigmoid`] is the default everywhere.
pub fn delta_mse_sigmoid_summed(y: &Matrix, t: &Matrix) -> Result<ErrorSignal> {
    check_sigmoid_range(y)?;
    if y.rows() != t.rows() || y.cols() != t.cols() {
        return Err(Error::DimensionMismatch {
            op: "delta_mse_sigmoid_summed",
            left_rows: y.rows(),
            left_cols: y.cols(),
            right_rows: t.rows(),
            right_cols: t.cols(),
        });
    }
    let mut delta = Matrix::zeros(y.rows(), y.cols());
    for p in 0..y.rows() {
        let yr = y.row(p);
        let tr = t.row(p);
        let sum: f64 = tr.iter().zip(yr).map(|(t, y)| t - y).sum();
        let dr = delta.row_mut(p);
        for c in 0..yr.len() {
            dr[c] = -2.0 * yr[c] * (1.0 - yr[c]) * sum;
        }
    }
    Ok(delta)
}

/// MSE-through-linear error signal: Δ(c) = 2·(y_c − t_c). Used to verify the
/// gradient path end to end against finite differences.
pub fn delta_mse_linear(y: &Matrix, t: &Matrix) -> Result<ErrorSignal> {
    let diff = y.sub(t)?;
    let mut delta = diff;
    delta.scale(2.0);
    Ok(delta)
}

fn check_sigmoid_range(y: &Matrix) -> Result<()> {
    for p in 0..y.rows() {
        for (c, &v) in y.row(p).iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ActivationRange { row: p, col: c, value: v });
            }
        }
    }
    Ok(())
}

/// Mean-reduced weight gradient G = (1/N_v)·Δᵀ·X_a, shaped M × N_u like the
/// weight matrix it updates.
pub fn gradient(delta: &ErrorSignal, batch: &AugmentedBatch) -> Result<Matrix> {
    if delta.rows() != batch.num_patterns() || delta.cols() != batch.num_classes() {
        return Err(Error::DimensionMismatch {
            op: "gradient",
            left_rows: delta.rows(),
            left_cols: delta.cols(),
            right_rows: batch.num_patterns(),
            right_cols: batch.num_classes(),
        });
    }
    let mut g = delta.transpose().matmul(batch.patterns())?;
    g.scale(1.0 / batch.num_patterns() as f64);
    Ok(g)
}
