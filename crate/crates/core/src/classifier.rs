//! The linear classifier itself: input augmentation, forward pass, argmax
//! decision rule, and classification-error computation.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Output scores, one row per pattern and one column per class. Produced by
/// [`forward`]; row `p` is `W · x_ap`.
pub type Discriminants = Matrix;

/// A dataset prepared for training: patterns with the constant-1 bias column
/// prepended, and one-hot targets scaled by `b`.
#[derive(Debug, Clone)]
pub struct AugmentedBatch {
    patterns: Matrix,
    targets: Matrix,
    labels: Vec<usize>,
    b: f64,
}

impl AugmentedBatch {
    /// Patterns, N_v × N_u, first column all ones.
    pub fn patterns(&self) -> &Matrix {
        &self.patterns
    }

    /// Targets, N_v × M: `b` at the labeled class, 0 elsewhere.
    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The one-hot target amplitude.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// N_v, the number of patterns.
    pub fn num_patterns(&self) -> usize {
        self.patterns.rows()
    }

    /// N_u = N + 1, the augmented feature count.
    pub fn num_aug_features(&self) -> usize {
        self.patterns.cols()
    }

    /// M, the number of classes.
    pub fn num_classes(&self) -> usize {
        self.targets.cols()
    }

    /// Gather the given patterns into a new batch (used for mini-batches).
    /// Indices must be in range.
    pub fn subset(&self, indices: &[usize]) -> AugmentedBatch {
        let n_u = self.num_aug_features();
        let m = self.num_classes();
        let mut patterns = Vec::with_capacity(indices.len() * n_u);
        let mut targets = Vec::with_capacity(indices.len() * m);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            assert!(i < self.num_patterns(), "subset index out of range");
            patterns.extend_from_slice(self.patterns.row(i));
            targets.extend_from_slice(self.targets.row(i));
            labels.push(self.labels[i]);
        }
        AugmentedBatch {
            patterns: Matrix::from_vec(indices.len(), n_u, patterns)
                .expect("shape by construction"),
            targets: Matrix::from_vec(indices.len(), m, targets)
                .expect("shape by construction"),
            labels,
            b: self.b,
        }
    }
}

/// Classifier weights, M × N_u. Construction rejects non-finite entries, so
/// a diverging trainer is caught at the first bad update rather than three
/// matmuls later.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    w: Matrix,
}

impl WeightMatrix {
    pub fn new(w: Matrix) -> Result<Self> {
        if let Some((row, col)) = w.find_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        Ok(WeightMatrix { w })
    }

    /// The all-zero initial weights used by the gradient trainers.
    pub fn zeros(num_classes: usize, num_aug_features: usize) -> Self {
        WeightMatrix {
            w: Matrix::zeros(num_classes, num_aug_features),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn into_matrix(self) -> Matrix {
        self.w
    }

    /// M, the number of classes.
    pub fn num_classes(&self) -> usize {
        self.w.rows()
    }

    /// N_u, the augmented feature count.
    pub fn num_aug_features(&self) -> usize {
        self.w.cols()
    }
}

/// Prepend the constant-1 bias column and build one-hot targets scaled by
/// `b`. Labels are 0-based.
pub fn augment(raw: &Dataset, b: f64) -> Result<AugmentedBatch> {
    if !(b > 0.0) {
        return Err(Error::Config(format!(
            "target amplitude b must be positive, got {b}"
        )));
    }
    if raw.num_patterns() == 0 {
        return Err(Error::Config("dataset has no patterns".to_string()));
    }
    if raw.num_features() == 0 {
        return Err(Error::EmptyFeatureVector);
    }
    let n_v = raw.num_patterns();
    let n_u = raw.num_features() + 1;
    let m = raw.num_classes();
    let mut patterns = Vec::with_capacity(n_v * n_u);
    let mut targets = Matrix::zeros(n_v, m);
    for p in 0..n_v {
        patterns.push(1.0);
        patterns.extend_from_slice(raw.features().row(p));
        let label = raw.labels()[p];
        if label >= m {
            return Err(Error::LabelOutOfRange {
                row: p,
                label,
                num_classes: m,
            });
        }
        targets.set(p, label, b);
    }
    Ok(AugmentedBatch {
        patterns: Matrix::from_vec(n_v, n_u, patterns).expect("shape by construction"),
        targets,
        labels: raw.labels().to_vec(),
        b,
    })
}

/// Forward pass: `y_p = W · x_ap` for every pattern, linear activation.
pub fn forward(w: &WeightMatrix, batch: &AugmentedBatch) -> Result<Discriminants> {
    if w.num_aug_features() != batch.num_aug_features() {
        return Err(Error::DimensionMismatch {
            op: "forward",
            left_rows: w.num_classes(),
            left_cols: w.num_aug_features(),
            right_rows: batch.num_patterns(),
            right_cols: batch.num_aug_features(),
        });
    }
    batch.patterns().matmul_transpose(w.matrix())
}

/// Decision rule: per pattern, the class with the largest score. Ties go to
/// the lowest class index, which keeps results deterministic.
pub fn predict(y: &Discriminants) -> Vec<usize> {
    let mut out = Vec::with_capacity(y.rows());
    for p in 0..y.rows() {
        let row = y.row(p);
        let mut best = 0;
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = i;
            }
        }
        out.push(best);
    }
    out
}

/// Fraction of mismatched predictions, in [0, 1]. The CLI layer reports this
/// ×100 as a percentage.
pub fn classification_error(pred: &[usize], labels: &[usize]) -> Result<f64> {
    if pred.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: labels.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Config(
            "cannot compute classification error on zero patterns".to_string(),
        ));
    }
    let mismatches = pred
        .iter()
        .zip(labels)
        .filter(|(a, b)| a != b)
        .count();
    Ok(mismatches as f64 / pred.len() as f64)
}
