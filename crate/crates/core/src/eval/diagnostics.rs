use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Slot bucket counts restricted to patterns of one class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassSlotCounts {
    pub consistent: usize,
    pub inconsistent: usize,
    pub zero_error: usize,
    pub outlier: usize,
}

/// Structural breakdown of where a trained classifier's regression errors
/// live.
///
/// Every output slot lands in exactly one of three buckets. For the slot of
/// the labeled class, an output *above* its target is inconsistent — the
/// discrepancy points in a direction the decision rule cannot punish — and
/// an output below is consistent. For every other class the roles flip: an
/// output below its target is inconsistent, above is consistent. Exact
/// equality is counted separately as zero-error, since both readings of the
/// boundary agree that nothing needs fixing there. Outliers
/// (`|y − t| > threshold`) are tallied independently of the three buckets.
#[derive(Debug, Clone)]
pub struct ErrorDiagnostics {
    pub num_patterns: usize,
    pub num_classes: usize,
    pub outlier_threshold: f64,
    pub consistent_slots: usize,
    pub inconsistent_slots: usize,
    pub zero_error_slots: usize,
    pub outlier_slots: usize,
    /// Per-pattern bias magnitude `|m_y(p) − m_t(p)|`, the absolute gap
    /// between the mean output and the mean target of the pattern.
    pub pattern_bias: Vec<f64>,
    /// Buckets restricted to patterns labeled with each class.
    pub per_class: Vec<ClassSlotCounts>,
}

impl ErrorDiagnostics {
    pub fn pattern_bias_mean(&self) -> f64 {
        if self.pattern_bias.is_empty() {
            return 0.0;
        }
        self.pattern_bias.iter().sum::<f64>() / self.pattern_bias.len() as f64
    }

    pub fn pattern_bias_max(&self) -> f64 {
        self.pattern_bias.iter().cloned().fold(0.0, f64::max)
    }

    /// Total slots across the three exclusive buckets; equals
    /// `num_patterns · num_classes` by construction.
    pub fn total_slots(&self) -> usize {
        self.consistent_slots + self.inconsistent_slots + self.zero_error_slots
    }
}

/// Classify every output slot of `y` against targets `t`.
pub fn diagnose_errors(
    y: &Matrix,
    t: &Matrix,
    labels: &[usize],
    outlier_threshold: f64,
) -> Result<ErrorDiagnostics> {
    if y.rows() != t.rows() || y.cols() != t.cols() {
        return Err(Error::DimensionMismatch {
            op: "diagnose_errors",
            left_rows: y.rows(),
            left_cols: y.cols(),
            right_rows: t.rows(),
            right_cols: t.cols(),
        });
    }
    if labels.len() != y.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: y.rows(),
        });
    }
    if !(outlier_threshold.is_finite() && outlier_threshold > 0.0) {
        return Err(Error::Config(format!(
            "outlier threshold must be positive and finite, got {outlier_threshold}"
        )));
    }
    let n_v = y.rows();
    let m = y.cols();
    for (p, &label) in labels.iter().enumerate() {
        if label >= m {
            return Err(Error::LabelOutOfRange {
                row: p,
                label,
                num_classes: m,
            });
        }
    }

    let mut diag = ErrorDiagnostics {
        num_patterns: n_v,
        num_classes: m,
        outlier_threshold,
        consistent_slots: 0,
        inconsistent_slots: 0,
        zero_error_slots: 0,
        outlier_slots: 0,
        pattern_bias: Vec::with_capacity(n_v),
        per_class: vec![ClassSlotCounts::default(); m],
    };

    for p in 0..n_v {
        let i_c = labels[p];
        let class = &mut diag.per_class[i_c];
        let mut sum_y = 0.0;
        let mut sum_t = 0.0;
        for i in 0..m {
            let yv = y.get(p, i);
            let tv = t.get(p, i);
            sum_y += yv;
            sum_t += tv;
            if yv == tv {
                diag.zero_error_slots += 1;
                class.zero_error += 1;
            } else if (i == i_c) == (yv > tv) {
                // Labeled class overshooting, or another class
                // undershooting: the decision rule cannot be hurt by it.
                diag.inconsistent_slots += 1;
                class.inconsistent += 1;
            } else {
                diag.consistent_slots += 1;
                class.consistent += 1;
            }
            if (yv - tv).abs() > outlier_threshold {
                diag.outlier_slots += 1;
                class.outlier += 1;
            }
        }
        diag.pattern_bias.push((sum_y / m as f64 - sum_t / m as f64).abs());
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_pattern(y: Vec<f64>, t: Vec<f64>, label: usize) -> ErrorDiagnostics {
        let yl = y.len();
        let y = Matrix::from_vec(1, yl, y).unwrap();
        let t = Matrix::from_vec(1, yl, t).unwrap();
        diagnose_errors(&y, &t, &[label], 3.0).unwrap()
    }

    #[test]
    fn exact_agreement_is_all_zero_error() {
        let d = one_pattern(vec![1.0, 0.0], vec![1.0, 0.0], 0);
        assert_eq!(d.zero_error_slots, 2);
        assert_eq!(d.consistent_slots, 0);
        assert_eq!(d.inconsistent_slots, 0);
        assert_eq!(d.pattern_bias[0], 0.0);
    }

    #[test]
    fn overshoot_and_undershoot_are_inconsistent() {
        let d = one_pattern(vec![1.2, -0.1], vec![1.0, 0.0], 0);
        assert_eq!(d.inconsistent_slots, 2);
        assert_eq!(d.consistent_slots, 0);
        assert_eq!(d.zero_error_slots, 0);
    }

    #[test]
    fn weak_correct_class_and_strong_wrong_class_are_consistent() {
        let d = one_pattern(vec![0.5, 0.6], vec![1.0, 0.0], 0);
        assert_eq!(d.consistent_slots, 2);
        assert_eq!(d.inconsistent_slots, 0);
    }

    #[test]
    fn zero_outputs_match_the_hand_classification() {
        // y = 0 everywhere: the labeled slot (t = 1) sits below its target,
        // which is consistent; every other slot hits t = 0 exactly.
        let y = Matrix::zeros(4, 3);
        let mut t = Matrix::zeros(4, 3);
        let labels = [0, 1, 2, 0];
        for (p, &l) in labels.iter().enumerate() {
            t.set(p, l, 1.0);
        }
        let d = diagnose_errors(&y, &t, &labels, 3.0).unwrap();
        assert_eq!(d.consistent_slots, 4);
        assert_eq!(d.zero_error_slots, 8);
        assert_eq!(d.inconsistent_slots, 0);
        // Pattern bias of |0 - 1/3| for every pattern.
        for bias in &d.pattern_bias {
            assert!((bias - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn buckets_conserve_the_slot_count() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n_v = 37;
        let m = 5;
        let mut y = Matrix::zeros(n_v, m);
        let mut t = Matrix::zeros(n_v, m);
        let mut labels = Vec::new();
        for p in 0..n_v {
            labels.push(rng.gen_range(0..m));
            for i in 0..m {
                y.set(p, i, rng.gen_range(-2.0..2.0));
                t.set(p, i, if i == labels[p] { 1.0 } else { 0.0 });
            }
        }
        let d = diagnose_errors(&y, &t, &labels, 0.5).unwrap();
        assert_eq!(d.total_slots(), n_v * m);
        let per_class_total: usize = d
            .per_class
            .iter()
            .map(|c| c.consistent + c.inconsistent + c.zero_error)
            .sum();
        assert_eq!(per_class_total, n_v * m);
        let per_class_outliers: usize = d.per_class.iter().map(|c| c.outlier).sum();
        assert_eq!(per_class_outliers, d.outlier_slots);
        assert!(d.outlier_slots > 0, "threshold 0.5 should flag something");
    }

    #[test]
    fn outliers_respect_the_threshold() {
        let y = Matrix::from_vec(1, 2, vec![4.5, 0.0]).unwrap();
        let t = Matrix::from_vec(1, 2, vec![1.0, 0.0]).unwrap();
        let d = diagnose_errors(&y, &t, &[0], 3.0).unwrap();
        assert_eq!(d.outlier_slots, 1);
        let d = diagnose_errors(&y, &t, &[0], 4.0).unwrap();
        assert_eq!(d.outlier_slots, 0);
    }

    #[test]
    fn shape_and_argument_errors() {
        let y = Matrix::zeros(2, 3);
        let t = Matrix::zeros(2, 2);
        assert!(matches!(
            diagnose_errors(&y, &t, &[0, 1], 3.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let t = Matrix::zeros(2, 3);
        assert!(matches!(
            diagnose_errors(&y, &t, &[0], 3.0),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            diagnose_errors(&y, &t, &[0, 5], 3.0),
            Err(Error::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            diagnose_errors(&y, &t, &[0, 1], 0.0),
            Err(Error::Config(_))
        ));
    }
}
