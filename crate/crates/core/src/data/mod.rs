//! Dataset ingestion (IDX and CIFAR-10 binary), normalization, and synthetic
//! Gaussian data for tests and demos.

mod cifar;
mod idx;
mod synth;

pub use cifar::load_cifar10;
pub use idx::load_idx;
pub use synth::synth_gaussians;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// How [`normalize01`] maps features into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeMode {
    /// Divide by 255 — the right choice for byte-valued image data.
    ByteScale,
    /// Per-feature min-max; a constant feature maps to 0.0.
    MinMax,
}

/// A labeled dataset: one feature row per pattern.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
    normalized: bool,
    name: String,
}

impl Dataset {
    /// Build a dataset, validating every invariant: label/feature row counts
    /// match, labels are within `[0, num_classes)`, features are finite, and
    /// a dataset claiming to be normalized really is within [0, 1].
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        normalized: bool,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::LengthMismatch {
                left: features.rows(),
                right: labels.len(),
            });
        }
        for (row, &label) in labels.iter().enumerate() {
            if label >= num_classes {
                return Err(Error::LabelOutOfRange {
                    row,
                    label,
                    num_classes,
                });
            }
        }
        if let Some((row, col)) = features.find_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        if normalized {
            for (p, &v) in features.data().iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    let cols = features.cols().max(1);
                    return Err(Error::ActivationRange {
                        row: p / cols,
                        col: p % cols,
                        value: v,
                    });
                }
            }
        }
        Ok(Dataset {
            features,
            labels,
            num_classes,
            normalized,
            name: name.into(),
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of patterns (N_v).
    pub fn num_patterns(&self) -> usize {
        self.features.rows()
    }

    /// Number of raw features (N, before augmentation).
    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    /// Gather the given rows into a new dataset, preserving class count,
    /// normalization state, and name. Indices must be in range.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let n = self.num_features();
        let mut data = Vec::with_capacity(indices.len() * n);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            assert!(i < self.num_patterns(), "subset index out of range");
            data.extend_from_slice(self.features.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features: Matrix::from_vec(indices.len(), n, data)
                .expect("subset shape is consistent by construction"),
            labels,
            num_classes: self.num_classes,
            normalized: self.normalized,
            name: self.name.clone(),
        }
    }
}

/// Stack datasets into one corpus under a new name. All parts must agree on
/// feature count and normalization state; the class count becomes the
/// largest of the parts' counts (a part may simply lack the top classes).
pub fn concat(name: impl Into<String>, parts: &[Dataset]) -> Result<Dataset> {
    let Some(first) = parts.first() else {
        return Err(Error::Config("concat needs at least one dataset".to_string()));
    };
    let cols = first.num_features();
    let mut rows = 0;
    let mut num_classes = 0;
    for part in parts {
        if part.num_features() != cols {
            return Err(Error::Config(format!(
                "cannot concatenate {}: {} features where {} has {}",
                part.name(),
                part.num_features(),
                first.name(),
                cols
            )));
        }
        if part.is_normalized() != first.is_normalized() {
            return Err(Error::Config(format!(
                "cannot concatenate {}: normalization state differs from {}",
                part.name(),
                first.name()
            )));
        }
        rows += part.num_patterns();
        num_classes = num_classes.max(part.num_classes());
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut labels = Vec::with_capacity(rows);
    for part in parts {
        data.extend_from_slice(part.features.data());
        labels.extend_from_slice(&part.labels);
    }
    Ok(Dataset {
        features: Matrix::from_vec(rows, cols, data).expect("shape counted above"),
        labels,
        num_classes,
        normalized: first.normalized,
        name: name.into(),
    })
}

/// Map features into [0, 1]. Already-normalized datasets pass through
/// unchanged, which makes the operation idempotent.
pub fn normalize01(d: &Dataset, mode: NormalizeMode) -> Dataset {
    if d.normalized {
        return d.clone();
    }
    let rows = d.num_patterns();
    let cols = d.num_features();
    let mut data = d.features.data().to_vec();
    match mode {
        NormalizeMode::ByteScale => {
            for v in &mut data {
                *v /= 255.0;
            }
        }
        NormalizeMode::MinMax => {
            for j in 0..cols {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..rows {
                    let v = data[i * cols + j];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let span = hi - lo;
                for i in 0..rows {
                    let v = &mut data[i * cols + j];
                    // A constant feature carries no information; the bias
                    // column already covers constants, so send it to 0.
                    *v = if span == 0.0 { 0.0 } else { (*v - lo) / span };
                }
            }
        }
    }
    Dataset {
        features: Matrix::from_vec(rows, cols, data).expect("shape unchanged"),
        labels: d.labels.clone(),
        num_classes: d.num_classes,
        normalized: true,
        name: d.name.clone(),
    }
}
