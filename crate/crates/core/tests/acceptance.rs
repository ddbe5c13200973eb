//! Acceptance suite. One test per criterion; each prints exactly one
//! `ACCEPTANCE <n> PASS|FAIL|SKIP` line (run with `-- --nocapture` to see
//! the lines live). Every numeric claim is checked against an oracle
//! computed inside this file — finite differences, a hand-rolled Cholesky
//! factorization, hand-rolled argmax error counting — never against the
//! code under test. Criteria 9–11 need real dataset files under
//! `$LCOR_DATA_ROOT` and skip with a printed reason when the files are
//! absent; this suite never downloads anything. Criteria 12–13 are the
//! full-protocol long-running checks and are `#[ignore]`d by default.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lcor::classifier::augment;
use lcor::data::{concat, load_cifar10, load_idx, normalize01, synth_gaussians, Dataset, NormalizeMode};
use lcor::eval::{emit_results, make_folds, run_kfold, KFoldResult};
use lcor::linalg::{ols_solve, Matrix};
use lcor::losses::{cross_entropy, delta_ce, delta_mse_sigmoid, mse, sigmoid_rows, softmax_rows};
use lcor::output_reset::{adjusted_mse, or_classic, or_pe, or_type2};
use lcor::trainer::{train, Algorithm, TrainerConfig};

fn pass(n: u32, name: &str, detail: &str) {
    println!("ACCEPTANCE {n:2} PASS — {name} ({detail})");
}

fn fail(n: u32, name: &str, why: &str) -> ! {
    println!("ACCEPTANCE {n:2} FAIL — {name}: {why}");
    panic!("acceptance criterion {n} failed: {why}");
}

fn skip(n: u32, name: &str, why: &str) {
    println!("ACCEPTANCE {n:2} SKIP — {name}: {why}");
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect();
    Matrix::from_vec(rows, cols, data).expect("sized to fit")
}

fn one_hot(labels: &[usize], num_classes: usize, b: f64) -> Matrix {
    let mut t = Matrix::zeros(labels.len(), num_classes);
    for (p, &label) in labels.iter().enumerate() {
        t.set(p, label, b);
    }
    t
}

/// Lowest-index argmax, written independently of the library's `predict`.
fn oracle_predict_row(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn oracle_error_fraction(y: &Matrix, labels: &[usize]) -> f64 {
    let mismatches = (0..y.rows())
        .filter(|&p| oracle_predict_row(y.row(p)) != labels[p])
        .count();
    mismatches as f64 / y.rows() as f64
}

// ---------------------------------------------------------------------------
// 1. Analytic error signals vs central finite differences.
// ---------------------------------------------------------------------------

fn central_difference<F: Fn(&Matrix) -> f64>(scores: &Matrix, p: usize, j: usize, f: F) -> f64 {
    const H: f64 = 1e-5;
    let mut plus = scores.clone();
    plus.set(p, j, scores.get(p, j) + H);
    let mut minus = scores.clone();
    minus.set(p, j, scores.get(p, j) - H);
    (f(&plus) - f(&minus)) / (2.0 * H)
}

fn relative_error(a: f64, fd: f64) -> f64 {
    (a - fd).abs() / (a.abs() + fd.abs()).max(1e-4)
}

#[test]
fn criterion_01_gradient_checks() {
    const NAME: &str = "analytic error signals match central finite differences (rel < 1e-5)";
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut instances = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        let m = rng.gen_range(2..=8);
        let n = rng.gen_range(1..=5);
        let scores = random_matrix(&mut rng, n, m, -3.0, 3.0);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();

        // Softmax cross-entropy: the loss is a mean over patterns, the raw
        // error signal is per pattern, so the finite difference of the loss
        // picks up a 1/n factor.
        let delta = delta_ce(&softmax_rows(&scores), &labels).expect("shapes match");
        for p in 0..n {
            for j in 0..m {
                let fd = central_difference(&scores, p, j, |s| {
                    cross_entropy(&softmax_rows(s), &labels).expect("shapes match").value
                });
                worst = worst.max(relative_error(delta.get(p, j) / n as f64, fd));
            }
        }
        instances += 1;

        // Sigmoid squared error against one-hot targets.
        let b = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let t = one_hot(&labels, m, b);
        let delta = delta_mse_sigmoid(&sigmoid_rows(&scores), &t).expect("shapes match");
        for p in 0..n {
            for j in 0..m {
                let fd = central_difference(&scores, p, j, |s| {
                    mse(&sigmoid_rows(s), &t).expect("shapes match").value
                });
                worst = worst.max(relative_error(delta.get(p, j) / n as f64, fd));
            }
        }
        instances += 1;
    }
    if !(worst < 1e-5) {
        fail(1, NAME, &format!("worst relative error {worst:.3e}"));
    }
    pass(
        1,
        NAME,
        &format!("{instances} instances, worst relative error {worst:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// 2. Householder-QR solver vs an independent Cholesky oracle.
// ---------------------------------------------------------------------------

/// Solve `R X = C` for symmetric positive definite `R` by a Cholesky
/// factorization written here from scratch.
fn cholesky_solve(r: &Matrix, c: &Matrix) -> Matrix {
    let n = r.rows();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = r.get(i, j);
            for (lik, ljk) in l[i][..j].iter().zip(&l[j][..j]) {
                s -= lik * ljk;
            }
            l[i][j] = if i == j {
                assert!(s > 0.0, "oracle fixture must be positive definite");
                s.sqrt()
            } else {
                s / l[j][j]
            };
        }
    }
    let mut x = Matrix::zeros(n, c.cols());
    for col in 0..c.cols() {
        // Forward substitution: L z = c.
        let mut z = vec![0.0f64; n];
        for i in 0..n {
            let mut s = c.get(i, col);
            for k in 0..i {
                s -= l[i][k] * z[k];
            }
            z[i] = s / l[i][i];
        }
        // Back substitution: Lᵀ x = z.
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= l[k][i] * x.get(k, col);
            }
            x.set(i, col, s / l[i][i]);
        }
    }
    x
}

#[test]
fn criterion_02_least_squares_oracle() {
    const NAME: &str = "QR normal-equation solver matches a Cholesky oracle within 1e-8";
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=20);
        let m = rng.gen_range(1..=5);
        // R = AᵀA/rows + I is symmetric positive definite and
        // well-conditioned by construction.
        let rows = n + 5;
        let a = random_matrix(&mut rng, rows, n, -1.0, 1.0);
        let mut r = a.transpose().matmul(&a).expect("square product");
        r.scale(1.0 / rows as f64);
        for i in 0..n {
            r.set(i, i, r.get(i, i) + 1.0);
        }
        let c = random_matrix(&mut rng, n, m, -1.0, 1.0);

        let report = ols_solve(&r, &c).expect("well-conditioned system");
        assert!(
            !report.regularization_applied,
            "fixture must not trip the ridge fallback"
        );
        // The library returns the weight orientation: one row per
        // right-hand-side column of C.
        let oracle = cholesky_solve(&r, &c);
        for i in 0..n {
            for j in 0..m {
                worst = worst.max((report.solution.get(j, i) - oracle.get(i, j)).abs());
            }
        }
    }
    if !(worst <= 1e-8) {
        fail(2, NAME, &format!("worst absolute deviation {worst:.3e}"));
    }
    pass(2, NAME, &format!("100 systems, worst deviation {worst:.2e}"));
}

// ---------------------------------------------------------------------------
// 3. Classic adjustment invariants.
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_classic_adjustment_invariants() {
    const NAME: &str =
        "classic adjustment: offset signs, non-increasing risk, stationary per-pattern offset";
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_gradient: f64 = 0.0;
    let mut instances = 0usize;
    for _ in 0..200 {
        let m = rng.gen_range(2..=10);
        let n = rng.gen_range(1..=15);
        let b = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let t = one_hot(&labels, m, b);
        let y = random_matrix(&mut rng, n, m, -2.0, 2.0);

        let mut previous = f64::INFINITY;
        for inner in 1..=3usize {
            let adjusted = or_classic(&y, &t, &labels, inner).expect("shapes match");
            let risk = adjusted_mse(&y, &adjusted).expect("shapes match").value;
            if risk > previous + 1e-12 * previous.max(1.0) {
                fail(
                    3,
                    NAME,
                    &format!("risk rose from {previous} to {risk} at inner pass {inner}"),
                );
            }
            previous = risk;

            if inner == 3 {
                for p in 0..n {
                    let mut residual_sum = 0.0;
                    for i in 0..m {
                        let d = adjusted.d().get(p, i);
                        if i == labels[p] {
                            if d < 0.0 {
                                fail(3, NAME, &format!("labeled-class offset {d} < 0"));
                            }
                        } else if d > 0.0 {
                            fail(3, NAME, &format!("other-class offset {d} > 0"));
                        }
                        residual_sum += y.get(p, i) - adjusted.t_prime().get(p, i);
                    }
                    // Derivative of the pattern's summed squared error with
                    // respect to its scalar offset is −2·Σᵢ residual.
                    worst_gradient = worst_gradient.max((2.0 * residual_sum).abs());
                }
            }
        }
        instances += 1;
    }
    if !(worst_gradient < 1e-8) {
        fail(
            3,
            NAME,
            &format!("offset gradient not stationary: {worst_gradient:.3e}"),
        );
    }
    pass(
        3,
        NAME,
        &format!("{instances} instances, max |dE'/da_p| {worst_gradient:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// 4. Clamped (type-2) adjustment.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_clamped_adjustment() {
    const NAME: &str =
        "clamped adjustment leaves no inconsistent slot and has one-sided divergence";
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..200 {
        let m = rng.gen_range(2..=10);
        let n = rng.gen_range(1..=15);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let t = one_hot(&labels, m, 1.0);
        let y = random_matrix(&mut rng, n, m, -2.0, 2.0);
        let adjusted = or_type2(&y, &t, &labels).expect("shapes match");
        for p in 0..n {
            for i in 0..m {
                let yv = y.get(p, i);
                let tv = adjusted.t_prime().get(p, i);
                // An inconsistent slot is a labeled-class output above its
                // target or an other-class output below its target.
                if i == labels[p] && yv > tv {
                    fail(4, NAME, &format!("labeled slot overshoots: y {yv} > t' {tv}"));
                }
                if i != labels[p] && yv < tv {
                    fail(4, NAME, &format!("other slot undershoots: y {yv} < t' {tv}"));
                }
            }
        }
    }

    // Limit fixture: one pattern, targets [1, 0], the off-class output held
    // at 0.3 while the labeled output sweeps.
    let clamped_risk = |y_c: f64| -> f64 {
        let y = Matrix::from_vec(1, 2, vec![y_c, 0.3]).expect("2 values");
        let t = Matrix::from_vec(1, 2, vec![1.0, 0.0]).expect("2 values");
        let adjusted = or_type2(&y, &t, &[0]).expect("shapes match");
        adjusted_mse(&y, &adjusted).expect("shapes match").value
    };
    let e_o = clamped_risk(1.0);
    let at_limit = clamped_risk(1e6);
    if !((at_limit - e_o).abs() < 1e-6) {
        fail(
            4,
            NAME,
            &format!("clamped risk at +1e6 is {at_limit}, expected the floor {e_o}"),
        );
    }
    let down = [clamped_risk(-10.0), clamped_risk(-1e3), clamped_risk(-1e6)];
    if !(down[0] < down[1] && down[1] < down[2] && down[2] > 1e10) {
        fail(4, NAME, &format!("no divergence on collapse: {down:?}"));
    }
    pass(
        4,
        NAME,
        &format!("200 instances clean; floor {e_o}, collapse risk {:.3e}", down[2]),
    );
}

// ---------------------------------------------------------------------------
// 5. Error-proportional adjustment identity E' = 2b²·Pe.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_proportional_identity() {
    const NAME: &str = "error-proportional adjusted risk equals 2b²·Pe to 1e-12";
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut max_deviation: f64 = 0.0;
    let mut instances = 0usize;
    let mut tie_patterns = 0usize;
    let mut full_violation_patterns = 0usize;

    let check = |y: &Matrix, labels: &[usize], b: f64, max_deviation: &mut f64| {
        let t = one_hot(labels, y.cols(), b);
        let adjusted = or_pe(y, &t, labels, b).expect("shapes match");
        let risk = adjusted_mse(y, &adjusted).expect("shapes match").value;
        let expected = 2.0 * b * b * oracle_error_fraction(y, labels);
        let deviation = (risk - expected).abs();
        if deviation > 1e-12 {
            fail(
                5,
                NAME,
                &format!("risk {risk} vs 2b²·Pe {expected} (deviation {deviation:.3e})"),
            );
        }
        *max_deviation = max_deviation.max(deviation);
    };

    // Unstructured random instances.
    for _ in 0..900 {
        let m = rng.gen_range(2..=8);
        let n = rng.gen_range(1..=20);
        let b = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let y = random_matrix(&mut rng, n, m, -2.0, 2.0);
        check(&y, &labels, b, &mut max_deviation);
        instances += 1;
    }

    // Exact argmax ties: slot 0 duplicates the labeled slot's value, so the
    // decision goes to the lower index with zero strict violators.
    for _ in 0..50 {
        let m = rng.gen_range(2..=8);
        let n = rng.gen_range(1..=10);
        let b = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(1..m)).collect();
        let mut y = random_matrix(&mut rng, n, m, -2.0, 2.0);
        for p in 0..n {
            let top = 1.0 + y.row(p).iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            y.set(p, 0, top);
            y.set(p, labels[p], top);
            tie_patterns += 1;
        }
        check(&y, &labels, b, &mut max_deviation);
        instances += 1;
    }

    // Full violation: the labeled output is the strict minimum, so all
    // M−1 other slots violate.
    for _ in 0..50 {
        let m = rng.gen_range(2..=8);
        let n = rng.gen_range(1..=10);
        let b = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let mut y = random_matrix(&mut rng, n, m, -2.0, 2.0);
        for p in 0..n {
            let bottom = y.row(p).iter().fold(f64::INFINITY, |a, &v| a.min(v)) - 1.0;
            y.set(p, labels[p], bottom);
            full_violation_patterns += 1;
        }
        check(&y, &labels, b, &mut max_deviation);
        instances += 1;
    }

    pass(
        5,
        NAME,
        &format!(
            "{instances} instances ({tie_patterns} tie patterns, {full_violation_patterns} \
             all-violator patterns), max deviation {max_deviation:.2e}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. The raw squared error diverges with any output magnitude.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_unbounded_raw_risk() {
    const NAME: &str = "raw squared error diverges monotonically over |y| in {10, 1e3, 1e6}";
    let t = Matrix::from_vec(1, 2, vec![1.0, 0.0]).expect("2 values");
    let risk = |y0: f64, y1: f64| -> f64 {
        let y = Matrix::from_vec(1, 2, vec![y0, y1]).expect("2 values");
        mse(&y, &t).expect("shapes match").value
    };
    for sign in [1.0, -1.0] {
        let labeled: Vec<f64> = [10.0, 1e3, 1e6].iter().map(|&k| risk(sign * k, 0.3)).collect();
        let other: Vec<f64> = [10.0, 1e3, 1e6].iter().map(|&k| risk(0.9, sign * k)).collect();
        for sweep in [&labeled, &other] {
            if !(sweep[0] < sweep[1] && sweep[1] < sweep[2] && sweep[2] > 1e10) {
                fail(6, NAME, &format!("sweep not divergent (sign {sign}): {sweep:?}"));
            }
        }
    }
    pass(
        6,
        NAME,
        &format!("both slots, both signs; risk at 1e6 is {:.3e}", risk(1e6, 0.3)),
    );
}

// ---------------------------------------------------------------------------
// 7. Separable two-Gaussian fixture: every trainer reaches zero error.
// ---------------------------------------------------------------------------

fn separable_fixture() -> Dataset {
    let means = vec![vec![-2.0, 0.0], vec![2.0, 0.0]];
    let scales = vec![0.35, 0.35];
    let raw = synth_gaussians(60, &means, &scales, 17);
    normalize01(&raw, NormalizeMode::MinMax)
}

#[test]
fn criterion_07_separable_convergence() {
    const NAME: &str = "all three trainers reach zero training error within 200 iterations";
    let dataset = separable_fixture();
    let batch = augment(&dataset, 1.0).expect("fresh fixture");
    let mut reached = Vec::new();
    for algorithm in [Algorithm::MseOr, Algorithm::Sce, Algorithm::SmseOr] {
        let mut cfg = TrainerConfig::new(algorithm);
        cfg.iterations = 200;
        cfg.seed = 1;
        let report = train(&batch, &batch, &cfg).expect("valid config");
        match report.train_pe_history.iter().position(|&pe| pe == 0.0) {
            Some(k) => reached.push(format!("{} at iteration {k}", algorithm.name())),
            None => fail(
                7,
                NAME,
                &format!(
                    "{} never reached zero training error (final {:.4})",
                    algorithm.name(),
                    report.train_pe_history.last().expect("non-empty history")
                ),
            ),
        }
    }
    pass(7, NAME, &reached.join(", "));
}

// ---------------------------------------------------------------------------
// 8. Evaluation-protocol invariants.
// ---------------------------------------------------------------------------

fn benchmark_corpus() -> Dataset {
    let means = vec![vec![0.0, 0.0], vec![2.5, 0.0], vec![0.0, 2.5]];
    let scales = vec![1.0, 1.0, 1.0];
    normalize01(&synth_gaussians(200, &means, &scales, 40), NormalizeMode::MinMax)
}

#[test]
fn criterion_08_protocol_invariants() {
    const NAME: &str = "fold composition 7/2/1, exact aggregation, byte-identical emission";

    // Composition, including a remainder that does not divide evenly.
    for n in [100usize, 105] {
        let plan = make_folds(n, 10, 88).expect("valid plan");
        let folds: Vec<BTreeSet<usize>> = (0..10)
            .map(|f| plan.fold_indices(f).into_iter().collect())
            .collect();
        for f in 0..10 {
            let splits = plan.splits(f);
            let test: BTreeSet<usize> = splits.test.iter().copied().collect();
            let val: BTreeSet<usize> = splits.val.iter().copied().collect();
            let train_set: BTreeSet<usize> = splits.train.iter().copied().collect();
            let expected_val: BTreeSet<usize> = folds[(f + 1) % 10]
                .union(&folds[(f + 2) % 10])
                .copied()
                .collect();
            let expected_train: BTreeSet<usize> = (0..10)
                .filter(|&g| g != f && g != (f + 1) % 10 && g != (f + 2) % 10)
                .flat_map(|g| folds[g].iter().copied())
                .collect();
            if test != folds[f] || val != expected_val || train_set != expected_train {
                fail(8, NAME, &format!("split composition wrong at n {n}, fold {f}"));
            }
            if test.len() + val.len() + train_set.len() != n {
                fail(8, NAME, &format!("split sizes do not cover n {n} at fold {f}"));
            }
        }
        if n == 100 {
            let s = plan.splits(0);
            if s.test.len() != 10 || s.val.len() != 20 || s.train.len() != 70 {
                fail(
                    8,
                    NAME,
                    &format!(
                        "expected 10/20/70 at n=100, got {}/{}/{}",
                        s.test.len(),
                        s.val.len(),
                        s.train.len()
                    ),
                );
            }
        }
    }

    // Aggregation exactness and worker-count independence on a real run.
    let dataset = benchmark_corpus();
    let mut cfg = TrainerConfig::new(Algorithm::Sce);
    cfg.iterations = 8;
    cfg.seed = 5;
    let plan = make_folds(dataset.num_patterns(), 10, cfg.seed).expect("valid plan");
    let first = run_kfold(&dataset, &cfg, &plan, 10, 2).expect("protocol run");
    let second = run_kfold(&dataset, &cfg, &plan, 10, 1).expect("protocol run");

    let mean_pe: f64 = first
        .per_fold
        .iter()
        .map(|r| r.final_test_pe.expect("test fold evaluated"))
        .sum::<f64>()
        / first.per_fold.len() as f64;
    let mean_best: f64 = first
        .per_fold
        .iter()
        .map(|r| r.best_val_iteration as f64)
        .sum::<f64>()
        / first.per_fold.len() as f64;
    if mean_pe.to_bits() != first.average_testing_pe.to_bits()
        || mean_best.to_bits() != first.best_average_validation_iteration.to_bits()
    {
        fail(8, NAME, "aggregates are not the exact mean of the fold results");
    }

    // Byte-identical emission from the two independent runs.
    let dir_a = tempfile::tempdir().expect("temp dir");
    let dir_b = tempfile::tempdir().expect("temp dir");
    let wrap = |result: KFoldResult| {
        let mut by_algo = BTreeMap::new();
        by_algo.insert("sce".to_string(), result);
        let mut by_dataset = BTreeMap::new();
        by_dataset.insert("synth".to_string(), by_algo);
        by_dataset
    };
    let files_a = emit_results(&wrap(first), dir_a.path()).expect("emission");
    let files_b = emit_results(&wrap(second), dir_b.path()).expect("emission");
    if files_a.len() != files_b.len() {
        fail(8, NAME, "the two runs emitted different file sets");
    }
    for (a, b) in files_a.iter().zip(&files_b) {
        let bytes_a = std::fs::read(a).expect("emitted file");
        let bytes_b = std::fs::read(b).expect("emitted file");
        if bytes_a != bytes_b {
            fail(
                8,
                NAME,
                &format!("{} differs between identical-seed runs", a.display()),
            );
        }
    }
    pass(
        8,
        NAME,
        &format!(
            "plans at n=100/105, exact means, {} files byte-identical",
            files_a.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 9–11. Dataset benchmarks, gated on $LCOR_DATA_ROOT.
// ---------------------------------------------------------------------------

fn data_root() -> Option<PathBuf> {
    std::env::var_os("LCOR_DATA_ROOT").map(PathBuf::from)
}

fn missing_files(root: &Path, relative: &[&str]) -> Vec<String> {
    relative
        .iter()
        .filter(|rel| !root.join(rel).is_file())
        .map(|rel| root.join(rel).display().to_string())
        .collect()
}

const MNIST_FILES: [&str; 4] = [
    "mnist/train-images-idx3-ubyte",
    "mnist/train-labels-idx1-ubyte",
    "mnist/t10k-images-idx3-ubyte",
    "mnist/t10k-labels-idx1-ubyte",
];
const FASHION_FILES: [&str; 4] = [
    "fashion/train-images-idx3-ubyte",
    "fashion/train-labels-idx1-ubyte",
    "fashion/t10k-images-idx3-ubyte",
    "fashion/t10k-labels-idx1-ubyte",
];
const CIFAR_FILES: [&str; 6] = [
    "cifar10/data_batch_1.bin",
    "cifar10/data_batch_2.bin",
    "cifar10/data_batch_3.bin",
    "cifar10/data_batch_4.bin",
    "cifar10/data_batch_5.bin",
    "cifar10/test_batch.bin",
];

/// Returns the dataset when its files are present, or a skip reason.
fn gated_dataset(name: &str, files: &[&str]) -> Result<Dataset, String> {
    let Some(root) = data_root() else {
        return Err("LCOR_DATA_ROOT is not set and this suite never downloads data".to_string());
    };
    let missing = missing_files(&root, files);
    if !missing.is_empty() {
        return Err(format!("missing dataset files: {}", missing.join(", ")));
    }
    let loaded = match name {
        "cifar10" => {
            let paths: Vec<PathBuf> = files.iter().map(|rel| root.join(rel)).collect();
            load_cifar10(&paths)
        }
        _ => {
            let dir = root.join(name);
            load_idx(
                &dir.join("train-images-idx3-ubyte"),
                &dir.join("train-labels-idx1-ubyte"),
            )
            .and_then(|tr| {
                let te = load_idx(
                    &dir.join("t10k-images-idx3-ubyte"),
                    &dir.join("t10k-labels-idx1-ubyte"),
                )?;
                concat(name, &[tr, te])
            })
        }
    };
    loaded
        .map(|d| normalize01(&d, NormalizeMode::ByteScale))
        .map_err(|e| format!("dataset files present but unreadable: {e}"))
}

fn reduced_config(algorithm: Algorithm, seed: u64) -> TrainerConfig {
    let mut cfg = TrainerConfig::new(algorithm);
    cfg.iterations = 500;
    cfg.seed = seed;
    cfg
}

/// Fold-level workers for the big benchmarks: two folds in flight bounds
/// peak memory while the inner linear algebra uses every core anyway.
const BENCH_JOBS: usize = 2;

#[test]
fn criterion_09_mnist_reduced_benchmark() {
    const NAME: &str = "MNIST, sigmoid-MSE with adjustment, 10-fold at 500 iterations: avg test PE <= 10%";
    let dataset = match gated_dataset("mnist", &MNIST_FILES) {
        Ok(d) => d,
        Err(reason) => return skip(9, NAME, &reason),
    };
    let cfg = reduced_config(Algorithm::SmseOr, 1009);
    let plan = make_folds(dataset.num_patterns(), 10, cfg.seed).expect("valid plan");
    let result = run_kfold(&dataset, &cfg, &plan, 10, BENCH_JOBS).expect("protocol run");
    if result.average_testing_pe <= 10.0 {
        pass(
            9,
            NAME,
            &format!("average testing PE {:.4}%", result.average_testing_pe),
        );
    } else {
        fail(
            9,
            NAME,
            &format!("average testing PE {:.4}% > 10%", result.average_testing_pe),
        );
    }
}

#[test]
fn criterion_10_fashion_reduced_benchmark() {
    const NAME: &str = "Fashion-MNIST, sigmoid-MSE with adjustment, reduced protocol: avg test PE <= 17%";
    let dataset = match gated_dataset("fashion", &FASHION_FILES) {
        Ok(d) => d,
        Err(reason) => return skip(10, NAME, &reason),
    };
    let cfg = reduced_config(Algorithm::SmseOr, 1010);
    let plan = make_folds(dataset.num_patterns(), 10, cfg.seed).expect("valid plan");
    let result = run_kfold(&dataset, &cfg, &plan, 10, BENCH_JOBS).expect("protocol run");
    if result.average_testing_pe <= 17.0 {
        pass(
            10,
            NAME,
            &format!("average testing PE {:.4}%", result.average_testing_pe),
        );
    } else {
        fail(
            10,
            NAME,
            &format!("average testing PE {:.4}% > 17%", result.average_testing_pe),
        );
    }
}

#[test]
fn criterion_11_cifar10_single_fold() {
    const NAME: &str = "CIFAR-10, single fold at 500 iterations: testing PE within [55%, 66%]";
    let dataset = match gated_dataset("cifar10", &CIFAR_FILES) {
        Ok(d) => d,
        Err(reason) => return skip(11, NAME, &reason),
    };
    let cfg = reduced_config(Algorithm::SmseOr, 1011);
    let plan = make_folds(dataset.num_patterns(), 10, cfg.seed).expect("valid plan");
    let result = run_kfold(&dataset, &cfg, &plan, 1, 1).expect("protocol run");
    let pe = result.per_fold[0].final_test_pe.expect("test fold evaluated");
    if (55.0..=66.0).contains(&pe) {
        pass(11, NAME, &format!("testing PE {pe:.4}%"));
    } else {
        fail(11, NAME, &format!("testing PE {pe:.4}% outside [55%, 66%]"));
    }
}

// ---------------------------------------------------------------------------
// 12–13. Full-protocol checks (hours of compute); run explicitly with
// `cargo test --test acceptance -- --ignored` once datasets are in place.
// ---------------------------------------------------------------------------

fn full_config(algorithm: Algorithm, seed: u64) -> TrainerConfig {
    let mut cfg = TrainerConfig::new(algorithm);
    cfg.iterations = 5000;
    cfg.seed = seed;
    cfg
}

fn full_protocol_run(dataset: &Dataset, algorithm: Algorithm, seed: u64) -> KFoldResult {
    let cfg = full_config(algorithm, seed);
    let plan = make_folds(dataset.num_patterns(), 10, cfg.seed).expect("valid plan");
    run_kfold(dataset, &cfg, &plan, 10, BENCH_JOBS).expect("protocol run")
}

#[test]
#[ignore = "full 5000-iteration protocol on three datasets; takes hours"]
fn criterion_12_ordering_full_protocol() {
    const NAME: &str = "full protocol: adjusted sigmoid-MSE beats softmax cross-entropy";
    let sources: [(&str, &[&str]); 3] = [
        ("mnist", &MNIST_FILES),
        ("fashion", &FASHION_FILES),
        ("cifar10", &CIFAR_FILES),
    ];
    let mut summaries = Vec::new();
    for (name, files) in sources {
        let dataset = match gated_dataset(name, files) {
            Ok(d) => d,
            Err(reason) => return skip(12, NAME, &reason),
        };
        let smse = full_protocol_run(&dataset, Algorithm::SmseOr, 1012);
        let sce = full_protocol_run(&dataset, Algorithm::Sce, 1012);
        let gap = smse.average_testing_pe - sce.average_testing_pe;
        if gap > 0.3 {
            fail(
                12,
                NAME,
                &format!(
                    "{name}: adjusted sigmoid-MSE {:.4}% vs cross-entropy {:.4}%",
                    smse.average_testing_pe, sce.average_testing_pe
                ),
            );
        }
        summaries.push(if gap > 0.0 {
            // Within seed noise: report rather than hard-fail.
            format!("{name}: within noise (gap {gap:+.3})")
        } else {
            format!("{name}: ordered (gap {gap:+.3})")
        });
    }
    pass(12, NAME, &summaries.join("; "));
}

#[test]
#[ignore = "full 5000-iteration protocol on MNIST twice; takes hours"]
fn criterion_13_convergence_speed_full_protocol() {
    const NAME: &str =
        "full protocol on MNIST: adjusted sigmoid-MSE converges in under half the iterations";
    let dataset = match gated_dataset("mnist", &MNIST_FILES) {
        Ok(d) => d,
        Err(reason) => return skip(13, NAME, &reason),
    };
    let smse = full_protocol_run(&dataset, Algorithm::SmseOr, 1013);
    let sce = full_protocol_run(&dataset, Algorithm::Sce, 1013);
    let ratio = smse.best_average_validation_iteration / sce.best_average_validation_iteration;
    if ratio < 0.5 {
        pass(
            13,
            NAME,
            &format!(
                "best-validation iterations {:.1} vs {:.1} (ratio {ratio:.3})",
                smse.best_average_validation_iteration, sce.best_average_validation_iteration
            ),
        );
    } else {
        fail(
            13,
            NAME,
            &format!(
                "ratio {ratio:.3} >= 0.5 ({:.1} vs {:.1})",
                smse.best_average_validation_iteration, sce.best_average_validation_iteration
            ),
        );
    }
}
