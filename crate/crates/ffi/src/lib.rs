//! C ABI for the linear-classifier trainers: opaque handles, integer status
//! codes, and a per-thread error message. The generated header lands in
//! `include/lcor.h` at build time.
//!
//! Conventions:
//! - Every function that can fail returns [`LcorStatus`]; outputs are
//!   written through out-pointers only on `LCOR_OK`.
//! - On any failure the thread's error message is updated; read it with
//!   [`lcor_last_error_message`]. The pointer stays valid until the next
//!   failing call on the same thread.
//! - Handles are created and destroyed by this library only. Passing a
//!   handle to the wrong `_free`, freeing twice, or using a freed handle is
//!   undefined behavior, as with any C library.
//! - All functions fence panics: a bug in the library surfaces as
//!   `LCOR_PANIC`, never as an unwind across the C boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lcor::classifier::{augment, classification_error, forward, predict, WeightMatrix};
use lcor::data::{normalize01, Dataset, NormalizeMode};
use lcor::linalg::Matrix;
use lcor::output_reset::OrVariant;
use lcor::trainer::{train, Algorithm, TrainerConfig};

/// Result code returned by every fallible function in this library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcorStatus {
    /// The call succeeded.
    LcorOk = 0,
    /// A required pointer argument was null.
    LcorNullPointer = 1,
    /// An argument was malformed (bad sizes, labels out of range, unknown
    /// algorithm code, invalid configuration).
    LcorInvalidArgument = 2,
    /// Training or evaluation failed after validation passed.
    LcorTrainingError = 3,
    /// An internal invariant broke; the operation was aborted safely.
    LcorPanic = 4,
}

/// An immutable set of patterns with integer class labels.
pub struct LcorDataset {
    inner: Dataset,
}

/// A trained linear classifier.
pub struct LcorModel {
    weights: WeightMatrix,
    b: f64,
    best_iteration: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
}

/// Message describing the most recent failure on the calling thread, or an
/// empty string if nothing failed yet. Valid until the next failing call on
/// this thread; never null.
#[no_mangle]
pub extern "C" fn lcor_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn fence<F: FnOnce() -> LcorStatus>(body: F) -> LcorStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(&format!("internal error: {detail}"));
            LcorStatus::LcorPanic
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> LcorStatus {
    set_error(&e.to_string());
    LcorStatus::LcorInvalidArgument
}

fn training_error(e: &lcor::Error) -> LcorStatus {
    set_error(&e.to_string());
    if e.is_config() {
        LcorStatus::LcorInvalidArgument
    } else {
        LcorStatus::LcorTrainingError
    }
}

fn null_pointer(name: &str) -> LcorStatus {
    set_error(&format!("{name} must not be null"));
    LcorStatus::LcorNullPointer
}

/// Create a dataset from row-major features (`num_patterns` rows of
/// `num_features` doubles) and one label per pattern, each in
/// `[0, num_classes)`.
///
/// # Safety
/// `features` must point to `num_patterns * num_features` readable doubles
/// and `labels` to `num_patterns` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcor_dataset_new(
    features: *const f64,
    labels: *const u32,
    num_patterns: usize,
    num_features: usize,
    num_classes: usize,
    out: *mut *mut LcorDataset,
) -> LcorStatus {
    fence(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if features.is_null() {
            return null_pointer("features");
        }
        if labels.is_null() {
            return null_pointer("labels");
        }
        let Some(total) = num_patterns.checked_mul(num_features) else {
            return invalid("num_patterns * num_features overflows");
        };
        let feature_data = unsafe { std::slice::from_raw_parts(features, total) }.to_vec();
        let label_data: Vec<usize> = unsafe { std::slice::from_raw_parts(labels, num_patterns) }
            .iter()
            .map(|&l| l as usize)
            .collect();
        let matrix = match Matrix::from_vec(num_patterns, num_features, feature_data) {
            Ok(m) => m,
            Err(e) => return invalid(e),
        };
        match Dataset::new("ffi", matrix, label_data, num_classes, false) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(LcorDataset { inner })) };
                LcorStatus::LcorOk
            }
            Err(e) => invalid(e),
        }
    })
}

/// Rescale every feature column to [0, 1] in place (min-max). Training
/// works on raw features too, but normalized inputs condition the solvers
/// far better; call this unless the data is already scaled. Idempotent.
///
/// # Safety
/// `dataset` must be a live handle from [`lcor_dataset_new`].
#[no_mangle]
pub unsafe extern "C" fn lcor_dataset_normalize(dataset: *mut LcorDataset) -> LcorStatus {
    fence(|| {
        if dataset.is_null() {
            return null_pointer("dataset");
        }
        let handle = unsafe { &mut *dataset };
        handle.inner = normalize01(&handle.inner, NormalizeMode::MinMax);
        LcorStatus::LcorOk
    })
}

/// Number of patterns, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcor_dataset_num_patterns(dataset: *const LcorDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    unsafe { &*dataset }.inner.num_patterns()
}

/// Destroy a dataset handle. Null is a no-op.
///
/// # Safety
/// `dataset` must be null or a live handle; the handle is dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn lcor_dataset_free(dataset: *mut LcorDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

fn algorithm_from_code(code: u32) -> Result<Algorithm, LcorStatus> {
    match code {
        0 => Ok(Algorithm::Sce),
        1 => Ok(Algorithm::MseOr),
        2 => Ok(Algorithm::SmseOr),
        other => Err(invalid(format!(
            "unknown algorithm code {other}; expected 0 (softmax cross-entropy), \
             1 (least-squares with adjustment), or 2 (sigmoid MSE with adjustment)"
        ))),
    }
}

fn or_variant_from_code(code: u32) -> Result<Option<OrVariant>, LcorStatus> {
    match code {
        0 => Ok(Some(OrVariant::Classic)),
        1 => Ok(Some(OrVariant::Type2)),
        2 => Ok(Some(OrVariant::PeProportional)),
        3 => Ok(None),
        other => Err(invalid(format!(
            "unknown adjustment code {other}; expected 0 (classic), 1 (clamped), \
             2 (error-proportional), or 3 (no adjustment)"
        ))),
    }
}

/// Train a classifier.
///
/// `algorithm`: 0 softmax cross-entropy, 1 least-squares with target
/// adjustment, 2 sigmoid MSE with target adjustment. `or_variant`:
/// 0 classic, 1 clamped, 2 error-proportional, 3 none. `iterations` of 0
/// selects the algorithm's default budget. `b` is the labeled-class target
/// amplitude (1.0 is the usual choice) and `seed` fixes every random
/// decision, so equal inputs give bit-equal models.
///
/// # Safety
/// `train_data` and `validation` must be live dataset handles and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lcor_train(
    train_data: *const LcorDataset,
    validation: *const LcorDataset,
    algorithm: u32,
    or_variant: u32,
    iterations: usize,
    b: f64,
    seed: u64,
    out: *mut *mut LcorModel,
) -> LcorStatus {
    fence(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if train_data.is_null() {
            return null_pointer("train_data");
        }
        if validation.is_null() {
            return null_pointer("validation");
        }
        let train_set = &unsafe { &*train_data }.inner;
        let val_set = &unsafe { &*validation }.inner;

        let algorithm = match algorithm_from_code(algorithm) {
            Ok(a) => a,
            Err(status) => return status,
        };
        let mut cfg = TrainerConfig::new(algorithm);
        cfg.or_variant = match or_variant_from_code(or_variant) {
            Ok(v) => v,
            Err(status) => return status,
        };
        if iterations > 0 {
            cfg.iterations = iterations;
        }
        cfg.b = b;
        cfg.seed = seed;
        if let Err(e) = cfg.validate() {
            return invalid(e);
        }

        let train_batch = match augment(train_set, cfg.b) {
            Ok(batch) => batch,
            Err(e) => return invalid(e),
        };
        let val_batch = match augment(val_set, cfg.b) {
            Ok(batch) => batch,
            Err(e) => return invalid(e),
        };
        match train(&train_batch, &val_batch, &cfg) {
            Ok(report) => {
                let model = LcorModel {
                    weights: report.best_weights,
                    b: cfg.b,
                    best_iteration: report.best_val_iteration,
                };
                unsafe { *out = Box::into_raw(Box::new(model)) };
                LcorStatus::LcorOk
            }
            Err(e) => training_error(&e),
        }
    })
}

/// Classification error of the model on a dataset, as a fraction in
/// [0, 1], written to `out_error_rate`.
///
/// # Safety
/// `model` and `dataset` must be live handles; `out_error_rate` writable.
#[no_mangle]
pub unsafe extern "C" fn lcor_model_error_rate(
    model: *const LcorModel,
    dataset: *const LcorDataset,
    out_error_rate: *mut f64,
) -> LcorStatus {
    fence(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if dataset.is_null() {
            return null_pointer("dataset");
        }
        if out_error_rate.is_null() {
            return null_pointer("out_error_rate");
        }
        let model = unsafe { &*model };
        let data = &unsafe { &*dataset }.inner;
        let batch = match augment(data, model.b) {
            Ok(batch) => batch,
            Err(e) => return invalid(e),
        };
        let outputs = match forward(&model.weights, &batch) {
            Ok(y) => y,
            Err(e) => return training_error(&e),
        };
        match classification_error(&predict(&outputs), batch.labels()) {
            Ok(pe) => {
                unsafe { *out_error_rate = pe };
                LcorStatus::LcorOk
            }
            Err(e) => training_error(&e),
        }
    })
}

/// Classify one pattern of `num_features` doubles; the winning class index
/// goes to `out_label`.
///
/// # Safety
/// `model` must be a live handle, `features` readable for `num_features`
/// doubles, `out_label` writable.
#[no_mangle]
pub unsafe extern "C" fn lcor_model_predict(
    model: *const LcorModel,
    features: *const f64,
    num_features: usize,
    out_label: *mut u32,
) -> LcorStatus {
    fence(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if features.is_null() {
            return null_pointer("features");
        }
        if out_label.is_null() {
            return null_pointer("out_label");
        }
        let model = unsafe { &*model };
        let expected = model.weights.num_aug_features() - 1;
        if num_features != expected {
            return invalid(format!(
                "pattern has {num_features} features, the model expects {expected}"
            ));
        }
        let pattern = unsafe { std::slice::from_raw_parts(features, num_features) };
        // One augmented row: leading bias 1, then the raw features.
        let mut row = Vec::with_capacity(num_features + 1);
        row.push(1.0);
        row.extend_from_slice(pattern);
        let x = match Matrix::from_vec(1, num_features + 1, row) {
            Ok(m) => m,
            Err(e) => return invalid(e),
        };
        let scores = match x.matmul_transpose(model.weights.matrix()) {
            Ok(y) => y,
            Err(e) => return training_error(&e),
        };
        let winner = predict(&scores)[0];
        unsafe { *out_label = winner as u32 };
        LcorStatus::LcorOk
    })
}

/// Number of classes the model separates, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcor_model_num_classes(model: *const LcorModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.weights.num_classes()
}

/// Iteration whose weights the model carries (the validation-best round).
/// Returns 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcor_model_best_iteration(model: *const LcorModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.best_iteration
}

/// Destroy a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be null or a live handle; the handle is dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn lcor_model_free(model: *mut LcorModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}
