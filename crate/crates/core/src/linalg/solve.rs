use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Relative tolerance for the symmetry precondition on the system matrix.
const SYMMETRY_RTOL: f64 = 1e-9;

/// When and how strongly the solver falls back to ridge regularization.
/// The defaults are the conventional choice; trainers pass this through
/// untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePolicy {
    /// Condition proxy above which λ·I is added.
    pub condition_threshold: f64,
    /// λ = lambda_scale · trace(R) / N_u.
    pub lambda_scale: f64,
}

impl Default for RidgePolicy {
    fn default() -> Self {
        RidgePolicy {
            condition_threshold: 1e10,
            lambda_scale: 1e-8,
        }
    }
}

/// Outcome of a least-squares solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Weight matrix W (M × N_u) such that R·Wᵀ ≈ C.
    pub solution: Matrix,
    /// Condition proxy of the raw (unregularized) system.
    pub condition_estimate: f64,
    /// Whether the ridge fallback was triggered.
    pub regularization_applied: bool,
    /// The λ added to the diagonal; 0 when no regularization was applied.
    pub ridge_value: f64,
}

/// One Householder reflector, stored in a row-friendly layout so it can be
/// applied to right-hand-side vectors held as contiguous rows.
struct Reflector {
    /// Column (and starting row) this reflector acts on.
    start: usize,
    /// The Householder vector v; empty when the column needed no reflection.
    v: Vec<f64>,
    /// 2 / (vᵀv); 0 for a skipped reflector.
    beta: f64,
}

/// Householder triangularization of a square matrix, cached so that many
/// right-hand sides can be solved against the same system matrix. Training
/// re-solves Eq.-3-style systems with a fixed autocorrelation matrix and a
/// changing cross-correlation, so the O(n³) factorization is paid once.
pub struct OlsSolver {
    /// Upper-triangular factor of the (possibly regularized) system.
    upper: Matrix,
    reflectors: Vec<Reflector>,
    condition_estimate: f64,
    regularization_applied: bool,
    ridge_value: f64,
}

impl OlsSolver {
    /// Factor the autocorrelation matrix `r` with the default ridge policy.
    pub fn new(r: &Matrix) -> Result<Self> {
        Self::with_policy(r, RidgePolicy::default())
    }

    /// Factor the autocorrelation matrix `r`, applying the ridge fallback if
    /// the condition proxy exceeds the policy threshold.
    pub fn with_policy(r: &Matrix, policy: RidgePolicy) -> Result<Self> {
        validate_system_matrix(r)?;
        let (upper, reflectors) = factor(r);
        let cond = diag_condition_proxy(&upper);
        if cond <= policy.condition_threshold {
            return Ok(OlsSolver {
                upper,
                reflectors,
                condition_estimate: cond,
                regularization_applied: false,
                ridge_value: 0.0,
            });
        }
        // Ill-conditioned: add λ·I once and re-factor, keeping training total
        // rather than failing on near-singular class statistics.
        let n = r.rows();
        let ridge = policy.lambda_scale * r.trace() / n as f64;
        let mut regularized = r.clone();
        for i in 0..n {
            let d = regularized.get(i, i);
            regularized.set(i, i, d + ridge);
        }
        let (upper, reflectors) = factor(&regularized);
        Ok(OlsSolver {
            upper,
            reflectors,
            condition_estimate: cond,
            regularization_applied: true,
            ridge_value: ridge,
        })
    }

    /// Condition proxy of the raw system this solver was built from.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn regularization_applied(&self) -> bool {
        self.regularization_applied
    }

    pub fn ridge_value(&self) -> f64 {
        self.ridge_value
    }

    /// Solve R·Wᵀ = C for W, returned as M × N_u (one output row per column
    /// of `c`). Each right-hand side is solved independently and in a fixed
    /// order, so results are bit-identical regardless of thread count.
    pub fn solve(&self, c: &Matrix) -> Result<Matrix> {
        let n = self.upper.rows();
        if c.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "ols_solve",
                left_rows: n,
                left_cols: n,
                right_rows: c.rows(),
                right_cols: c.cols(),
            });
        }
        if let Some((row, col)) = c.find_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        // Row j of the transposed right-hand side is the RHS vector for
        // output j; solving in place turns it into row j of W.
        let mut w = c.transpose();
        let upper = &self.upper;
        let reflectors = &self.reflectors;
        let ridge_applied = self.regularization_applied;
        w.data_mut()
            .par_chunks_mut(n)
            .map(|x| {
                for refl in reflectors {
                    apply_reflector(refl, x);
                }
                back_substitute(upper, x, ridge_applied)
            })
            .collect::<Result<Vec<()>>>()?;
        Ok(w)
    }
}

/// Solve the normal-equation system R·Wᵀ = C by orthogonal factorization,
/// with an automatic ridge fallback for ill-conditioned R.
pub fn ols_solve(r: &Matrix, c: &Matrix) -> Result<SolveReport> {
    let solver = OlsSolver::new(r)?;
    let solution = solver.solve(c)?;
    Ok(SolveReport {
        solution,
        condition_estimate: solver.condition_estimate,
        regularization_applied: solver.regularization_applied,
        ridge_value: solver.ridge_value,
    })
}

/// Cheap conditioning proxy: the ratio of the largest to the smallest
/// diagonal magnitude of the triangular factor. A zero pivot maps to
/// `f64::MAX` rather than ∞.
pub fn condition_estimate(r: &Matrix) -> Result<f64> {
    if r.rows() != r.cols() {
        return Err(Error::NotSquare {
            rows: r.rows(),
            cols: r.cols(),
        });
    }
    if let Some((row, col)) = r.find_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    let (upper, _) = factor(r);
    Ok(diag_condition_proxy(&upper))
}

fn validate_system_matrix(r: &Matrix) -> Result<()> {
    if r.rows() != r.cols() {
        return Err(Error::NotSquare {
            rows: r.rows(),
            cols: r.cols(),
        });
    }
    if let Some((row, col)) = r.find_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    let scale = r.max_abs();
    if scale == 0.0 {
        return Err(Error::DegenerateAutocorrelation);
    }
    let mut max_asymmetry: f64 = 0.0;
    for i in 0..r.rows() {
        for j in (i + 1)..r.cols() {
            max_asymmetry = max_asymmetry.max((r.get(i, j) - r.get(j, i)).abs());
        }
    }
    if max_asymmetry > SYMMETRY_RTOL * scale {
        return Err(Error::NotSymmetric { max_asymmetry });
    }
    Ok(())
}

/// Householder QR of a square matrix: returns the upper-triangular factor
/// and the reflectors that realize Qᵀ.
fn factor(a: &Matrix) -> (Matrix, Vec<Reflector>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut reflectors = Vec::with_capacity(n);
    for k in 0..n {
        let mut norm2 = 0.0;
        for i in k..n {
            let v = m.get(i, k);
            norm2 += v * v;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            // Column already zero below and on the diagonal: pivot is 0.
            reflectors.push(Reflector {
                start: k,
                v: Vec::new(),
                beta: 0.0,
            });
            continue;
        }
        let akk = m.get(k, k);
        let alpha = if akk >= 0.0 { -norm } else { norm };
        // v = x − α·e₁; vᵀv = 2·norm·(norm + |a_kk|), never cancels.
        let mut v = Vec::with_capacity(n - k);
        v.push(akk - alpha);
        for i in (k + 1)..n {
            v.push(m.get(i, k));
        }
        let beta = 1.0 / (norm * (norm + akk.abs()));
        // Apply H = I − β·vvᵀ to the trailing columns.
        for j in (k + 1)..n {
            let mut s = 0.0;
            for (off, vi) in v.iter().enumerate() {
                s += vi * m.get(k + off, j);
            }
            s *= beta;
            for (off, vi) in v.iter().enumerate() {
                let cur = m.get(k + off, j);
                m.set(k + off, j, cur - s * vi);
            }
        }
        // Column k becomes (α, 0, …, 0) by construction.
        m.set(k, k, alpha);
        for i in (k + 1)..n {
            m.set(i, k, 0.0);
        }
        reflectors.push(Reflector { start: k, v, beta });
    }
    (m, reflectors)
}

/// Apply one reflector to a full-length right-hand-side vector in place.
#[inline]
fn apply_reflector(refl: &Reflector, x: &mut [f64]) {
    if refl.beta == 0.0 {
        return;
    }
    let seg = &mut x[refl.start..refl.start + refl.v.len()];
    let mut s = 0.0;
    for (vi, xi) in refl.v.iter().zip(seg.iter()) {
        s += vi * xi;
    }
    s *= refl.beta;
    for (vi, xi) in refl.v.iter().zip(seg.iter_mut()) {
        *xi -= s * vi;
    }
}

/// Solve upper·x = b in place, where `x` arrives holding b.
fn back_substitute(upper: &Matrix, x: &mut [f64], ridge_applied: bool) -> Result<()> {
    let n = upper.rows();
    for i in (0..n).rev() {
        let row = upper.row(i);
        let mut acc = x[i];
        for (l, xl) in x.iter().enumerate().skip(i + 1) {
            acc -= row[l] * xl;
        }
        let pivot = row[i];
        if pivot == 0.0 {
            return Err(Error::SingularSystem {
                column: i,
                ridge_applied,
            });
        }
        x[i] = acc / pivot;
    }
    Ok(())
}

fn diag_condition_proxy(upper: &Matrix) -> f64 {
    let n = upper.rows();
    if n == 0 {
        return 1.0;
    }
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for i in 0..n {
        let d = upper.get(i, i).abs();
        min = min.min(d);
        max = max.max(d);
    }
    if min == 0.0 {
        return f64::MAX;
    }
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent normal-equation oracle: Cholesky factorization with
    /// forward/back substitution. Deliberately a different algorithm from
    /// the Householder path under test.
    fn cholesky_solve(r: &Matrix, c: &Matrix) -> Matrix {
        let n = r.rows();
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = r.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    l.set(i, j, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        let m = c.cols();
        let mut w = Matrix::zeros(m, n);
        for j in 0..m {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut s = c.get(i, j);
                for k in 0..i {
                    s -= l.get(i, k) * y[k];
                }
                y[i] = s / l.get(i, i);
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in (i + 1)..n {
                    s -= l.get(k, i) * x[k];
                }
                x[i] = s / l.get(i, i);
            }
            for i in 0..n {
                w.set(j, i, x[i]);
            }
        }
        w
    }

    fn random_spd_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Matrix, Matrix) {
        let a = Matrix::from_vec(n, n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let mut r = a.transpose().matmul(&a).unwrap();
        for i in 0..n {
            let d = r.get(i, i);
            r.set(i, i, d + n as f64); // keep it well-conditioned
        }
        let c = Matrix::from_vec(n, m, (0..n * m).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .unwrap();
        (r, c)
    }

    #[test]
    fn identity_system_returns_rhs_transposed() {
        let r = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let c = Matrix::from_rows(&[vec![1.5, -2.0], vec![0.25, 4.0], vec![-3.0, 0.5]]).unwrap();
        let report = ols_solve(&r, &c).unwrap();
        assert_eq!(report.solution, c.transpose());
        assert!(!report.regularization_applied);
        assert_eq!(report.ridge_value, 0.0);
    }

    #[test]
    fn diagonal_system_hand_inverted() {
        let r = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![2.0, 4.0], vec![4.0, 8.0]]).unwrap();
        let w = ols_solve(&r, &c).unwrap().solution;
        // Wᵀ = [[1,2],[1,2]], so W = [[1,1],[2,2]].
        let expected = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        for (a, b) in w.data().iter().zip(expected.data()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn matches_cholesky_oracle_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let n = 2 + (trial % 19);
            let (r, c) = random_spd_system(&mut rng, n, 4);
            let w = ols_solve(&r, &c).unwrap().solution;
            let oracle = cholesky_solve(&r, &c);
            for (a, b) in w.data().iter().zip(oracle.data()) {
                assert!((a - b).abs() < 1e-8, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn residual_is_small_for_well_conditioned_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (r, c) = random_spd_system(&mut rng, 12, 3);
        let report = ols_solve(&r, &c).unwrap();
        assert!(report.condition_estimate < 1e6);
        let residual = r.matmul(&report.solution.transpose()).unwrap().sub(&c).unwrap();
        assert!(residual.max_abs() < 1e-8 * c.max_abs());
    }

    #[test]
    fn solution_invariant_under_symmetrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (mut r, c) = random_spd_system(&mut rng, 8, 2);
        // Perturb asymmetrically but within the symmetry tolerance.
        r.set(0, 1, r.get(0, 1) + 1e-13);
        let w_perturbed = ols_solve(&r, &c).unwrap().solution;
        let mut symmetrized = r.clone();
        for i in 0..8 {
            for j in 0..8 {
                symmetrized.set(i, j, 0.5 * (r.get(i, j) + r.get(j, i)));
            }
        }
        let w_sym = ols_solve(&symmetrized, &c).unwrap().solution;
        for (a, b) in w_perturbed.data().iter().zip(w_sym.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn condition_estimate_examples() {
        let i4 = Matrix::from_vec(
            4,
            4,
            (0..16).map(|i| if i % 5 == 0 { 1.0 } else { 0.0 }).collect(),
        )
        .unwrap();
        assert_eq!(condition_estimate(&i4).unwrap(), 1.0);

        let near_singular = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-8]]).unwrap();
        let est = condition_estimate(&near_singular).unwrap();
        assert!(est > 0.5e8 && est < 2e8, "estimate {est}");

        // Symmetric rank-deficient: third row equals the first.
        let deficient = Matrix::from_rows(&[
            vec![1.0, 2.0, 1.0],
            vec![2.0, 5.0, 2.0],
            vec![1.0, 2.0, 1.0],
        ])
        .unwrap();
        let est = condition_estimate(&deficient).unwrap();
        assert!(est >= 1e12, "estimate {est}");
    }

    #[test]
    fn condition_estimate_rejects_non_square() {
        assert!(condition_estimate(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn ill_conditioned_system_triggers_ridge() {
        let deficient = Matrix::from_rows(&[
            vec![1.0, 2.0, 1.0],
            vec![2.0, 5.0, 2.0],
            vec![1.0, 2.0, 1.0],
        ])
        .unwrap();
        let c = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![1.0]]).unwrap();
        let report = ols_solve(&deficient, &c).unwrap();
        assert!(report.regularization_applied);
        assert!(report.ridge_value > 0.0);
        assert!(report.condition_estimate >= 1e12);
        assert!(report.solution.find_non_finite().is_none());
    }

    #[test]
    fn rejects_degenerate_and_asymmetric_inputs() {
        let zero = Matrix::zeros(3, 3);
        let c = Matrix::zeros(3, 1);
        assert!(matches!(
            ols_solve(&zero, &c),
            Err(Error::DegenerateAutocorrelation)
        ));

        let asym = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.5, 1.0]]).unwrap();
        let c2 = Matrix::zeros(2, 1);
        assert!(matches!(ols_solve(&asym, &c2), Err(Error::NotSymmetric { .. })));

        let rect = Matrix::zeros(2, 3);
        assert!(matches!(
            ols_solve(&rect, &Matrix::zeros(2, 1)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn reusing_a_factorization_matches_fresh_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (r, c1) = random_spd_system(&mut rng, 9, 3);
        let (_, c2) = random_spd_system(&mut rng, 9, 3);
        let solver = OlsSolver::new(&r).unwrap();
        let w1 = solver.solve(&c1).unwrap();
        let w2 = solver.solve(&c2).unwrap();
        assert_eq!(w1, ols_solve(&r, &c1).unwrap().solution);
        assert_eq!(w2, ols_solve(&r, &c2).unwrap().solution);
    }
}
