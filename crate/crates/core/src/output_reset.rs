//! Target adjustment ("output reset"): three procedures that rewrite one-hot
//! regression targets so the squared error stops punishing outputs that are
//! already on the right side of the decision.
//!
//! * [`or_classic`] — alternating closed-form bias/offset updates under sign
//!   constraints.
//! * [`or_type2`] — one-pass clamp: raised targets never pull down, lowered
//!   targets never pull up.
//! * [`or_pe`] — sets targets so each misclassified pattern contributes
//!   exactly `2b²`, making the adjusted MSE proportional to the
//!   classification error.

use crate::classifier::predict;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::losses::{mse, LossValue};

/// Which adjustment procedure produced a set of targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrVariant {
    Classic,
    Type2,
    PeProportional,
}

impl OrVariant {
    /// Stable lowercase name used by the CLI and report files.
    pub fn name(&self) -> &'static str {
        match self {
            OrVariant::Classic => "classic",
            OrVariant::Type2 => "type2",
            OrVariant::PeProportional => "pe",
        }
    }
}

/// Adjusted targets t′ together with their decomposition t′ = t + a + d.
/// For the classic variant, `a` and `d` are the algorithm's bias and offset
/// variables; for the other variants `a` is zero and `d` simply records
/// t′ − t, so the decomposition identity holds for every variant.
#[derive(Debug, Clone)]
pub struct AdjustedTargets {
    t_prime: Matrix,
    a: Vec<f64>,
    d: Matrix,
    variant: OrVariant,
}

impl AdjustedTargets {
    pub fn t_prime(&self) -> &Matrix {
        &self.t_prime
    }

    /// Per-pattern bias a_p.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Per-output offsets d_p(i).
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn variant(&self) -> OrVariant {
        self.variant
    }

    /// Consume the adjustment, keeping only the adjusted target matrix.
    pub fn into_t_prime(self) -> Matrix {
        self.t_prime
    }
}

fn check_shapes(op: &'static str, y: &Matrix, t: &Matrix, labels: &[usize]) -> Result<()> {
    if y.rows() != t.rows() || y.cols() != t.cols() {
        return Err(Error::DimensionMismatch {
            op,
            left_rows: y.rows(),
            left_cols: y.cols(),
            right_rows: t.rows(),
            right_cols: t.cols(),
        });
    }
    if labels.len() != y.rows() {
        return Err(Error::LengthMismatch {
            left: y.rows(),
            right: labels.len(),
        });
    }
    for (row, &label) in labels.iter().enumerate() {
        if label >= y.cols() {
            return Err(Error::LabelOutOfRange {
                row,
                label,
                num_classes: y.cols(),
            });
        }
    }
    Ok(())
}

/// Classic output reset: per pattern, alternate the closed-form bias update
/// a_p = mean_i(y_i − t_i − d_i) with the sign-constrained offset update
/// d(i_c) = max(0, y − a − t), d(i_d) = min(0, y − a − t), for `iterations`
/// rounds (3 is the conventional cap).
///
/// After the final offset update the bias is refreshed once more: the
/// d-step changes the residual mean, and for any fixed d the mean update is
/// the exact minimizer of the adjusted error over a_p. Without this refresh
/// the returned pair is only stationary in the limit; with it, ∂E′/∂a_p = 0
/// holds exactly at the returned values while the sign constraints and the
/// per-round error decrease are untouched.
pub fn or_classic(
    y: &Matrix,
    t: &Matrix,
    labels: &[usize],
    iterations: usize,
) -> Result<AdjustedTargets> {
    assert!(iterations >= 1, "or_classic needs at least one iteration");
    check_shapes("or_classic", y, t, labels)?;
    let n_v = y.rows();
    let m = y.cols();
    let mut t_prime = Matrix::zeros(n_v, m);
    let mut a_all = Vec::with_capacity(n_v);
    let mut d_all = Matrix::zeros(n_v, m);
    let mut e = vec![0.0; m];
    let mut d = vec![0.0; m];
    for p in 0..n_v {
        let i_c = labels[p];
        for i in 0..m {
            e[i] = y.get(p, i) - t.get(p, i);
        }
        d.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..iterations {
            let a = e.iter().zip(&d).map(|(e, d)| e - d).sum::<f64>() / m as f64;
            for i in 0..m {
                d[i] = if i == i_c {
                    (e[i] - a).max(0.0)
                } else {
                    (e[i] - a).min(0.0)
                };
            }
        }
        let a = e.iter().zip(&d).map(|(e, d)| e - d).sum::<f64>() / m as f64;
        a_all.push(a);
        for i in 0..m {
            d_all.set(p, i, d[i]);
            t_prime.set(p, i, t.get(p, i) + a + d[i]);
        }
    }
    Ok(AdjustedTargets {
        t_prime,
        a: a_all,
        d: d_all,
        variant: OrVariant::Classic,
    })
}

/// One-pass clamp: the labeled class never gets a target below its output
/// when the output already exceeds the target, and unlabeled classes never
/// get a target above their output when the output is already below.
pub fn or_type2(y: &Matrix, t: &Matrix, labels: &[usize]) -> Result<AdjustedTargets> {
    check_shapes("or_type2", y, t, labels)?;
    let n_v = y.rows();
    let m = y.cols();
    let mut t_prime = Matrix::zeros(n_v, m);
    for p in 0..n_v {
        let i_c = labels[p];
        for i in 0..m {
            let yv = y.get(p, i);
            let tv = t.get(p, i);
            let adjusted = if i == i_c { tv.max(yv) } else { tv.min(yv) };
            t_prime.set(p, i, adjusted);
        }
    }
    Ok(decompose_without_bias(y, t, t_prime, OrVariant::Type2))
}

/// Error-proportional adjustment: correctly classified patterns get t′ = y
/// (no contribution); a misclassified pattern with K strict violators gets
/// t′(i_c) = y(i_c) + K·ε and t′(i_d(k)) = y(i_d(k)) − ε with
/// ε = b·√(2/(K² + K)), so every misclassified pattern contributes exactly
/// 2b² and the adjusted MSE equals 2b² times the classification error.
///
/// A pattern can be misclassified by the lowest-index tie rule while having
/// no strict violator (a tied score at a lower class index). Treating the
/// tied predicted class as the single violator keeps the proportionality
/// identity exact in that boundary case.
pub fn or_pe(y: &Matrix, t: &Matrix, labels: &[usize], b: f64) -> Result<AdjustedTargets> {
    if !(b > 0.0) {
        return Err(Error::Config(format!(
            "target amplitude b must be positive, got {b}"
        )));
    }
    check_shapes("or_pe", y, t, labels)?;
    let predicted = predict(y);
    let n_v = y.rows();
    let m = y.cols();
    let mut t_prime = Matrix::zeros(n_v, m);
    let mut violators = Vec::with_capacity(m);
    for p in 0..n_v {
        let i_c = labels[p];
        let row = y.row(p);
        let out = t_prime.row_mut(p);
        out.copy_from_slice(row);
        if predicted[p] == i_c {
            continue;
        }
        violators.clear();
        violators.extend((0..m).filter(|&i| i != i_c && row[i] > row[i_c]));
        if violators.is_empty() {
            violators.push(predicted[p]);
        }
        let k = violators.len() as f64;
        let eps = b * (2.0 / (k * k + k)).sqrt();
        out[i_c] = row[i_c] + k * eps;
        for &v in &violators {
            out[v] = row[v] - eps;
        }
    }
    Ok(decompose_without_bias(y, t, t_prime, OrVariant::PeProportional))
}

fn decompose_without_bias(
    y: &Matrix,
    t: &Matrix,
    t_prime: Matrix,
    variant: OrVariant,
) -> AdjustedTargets {
    let d = t_prime.sub(t).expect("shapes validated");
    AdjustedTargets {
        t_prime,
        a: vec![0.0; y.rows()],
        d,
        variant,
    }
}

/// The adjusted error E′: plain MSE against the adjusted targets.
pub fn adjusted_mse(y: &Matrix, adjusted: &AdjustedTargets) -> Result<LossValue> {
    mse(y, adjusted.t_prime())
}
