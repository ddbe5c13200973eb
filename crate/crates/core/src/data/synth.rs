use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::linalg::Matrix;

/// Deterministic isotropic Gaussian clusters, one per class. `means[c]` is
/// the center of class `c` and `deviation_scales[c]` its standard deviation
/// in every dimension. Patterns are generated class by class, so labels come
/// out in class-block order. The same seed always yields the same dataset.
///
/// Panics if fewer than 2 classes are given, if the means are ragged, or if
/// the scale list does not match the class count — these are programming
/// errors, not data errors.
pub fn synth_gaussians(
    n_per_class: usize,
    means: &[Vec<f64>],
    deviation_scales: &[f64],
    seed: u64,
) -> Dataset {
    assert!(means.len() >= 2, "need at least 2 classes");
    assert!(n_per_class >= 1, "need at least 1 pattern per class");
    assert_eq!(
        means.len(),
        deviation_scales.len(),
        "one deviation scale per class"
    );
    let dim = means[0].len();
    assert!(dim >= 1, "means must be non-empty vectors");
    assert!(
        means.iter().all(|m| m.len() == dim),
        "all class means must have the same dimension"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let standard = Normal::new(0.0, 1.0).expect("unit normal is valid");
    let num_classes = means.len();
    let mut data = Vec::with_capacity(num_classes * n_per_class * dim);
    let mut labels = Vec::with_capacity(num_classes * n_per_class);
    for (c, mean) in means.iter().enumerate() {
        let scale = deviation_scales[c];
        for _ in 0..n_per_class {
            for &m in mean {
                data.push(m + scale * standard.sample(&mut rng));
            }
            labels.push(c);
        }
    }
    let features = Matrix::from_vec(labels.len(), dim, data).expect("shape by construction");
    Dataset::new("synth", features, labels, num_classes, false)
        .expect("generated data satisfies all invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_datasets() {
        let means = vec![vec![-2.0, 0.0], vec![2.0, 0.0]];
        let scales = vec![0.1, 0.1];
        let a = synth_gaussians(50, &means, &scales, 42);
        let b = synth_gaussians(50, &means, &scales, 42);
        assert_eq!(a.features().data(), b.features().data());
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn different_seeds_differ() {
        let means = vec![vec![0.0], vec![1.0]];
        let scales = vec![1.0, 1.0];
        let a = synth_gaussians(10, &means, &scales, 1);
        let b = synth_gaussians(10, &means, &scales, 2);
        assert_ne!(a.features().data(), b.features().data());
    }

    #[test]
    fn labels_come_in_class_blocks() {
        let means = vec![vec![0.0, 0.0], vec![5.0, 5.0], vec![-5.0, 5.0]];
        let scales = vec![0.5, 0.5, 0.5];
        let d = synth_gaussians(4, &means, &scales, 9);
        assert_eq!(d.num_patterns(), 12);
        assert_eq!(d.num_classes(), 3);
        assert_eq!(d.labels(), &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn clusters_center_near_their_means() {
        let means = vec![vec![-2.0, 0.0], vec![2.0, 0.0]];
        let scales = vec![0.1, 0.1];
        let d = synth_gaussians(200, &means, &scales, 7);
        for c in 0..2 {
            let rows: Vec<usize> = (0..d.num_patterns())
                .filter(|&i| d.labels()[i] == c)
                .collect();
            let mean_x: f64 = rows
                .iter()
                .map(|&i| d.features().get(i, 0))
                .sum::<f64>()
                / rows.len() as f64;
            assert!(
                (mean_x - means[c][0]).abs() < 0.05,
                "class {c} sample mean {mean_x}"
            );
        }
    }
}
