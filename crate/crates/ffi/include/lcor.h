/* C interface to the lcor linear-classifier trainers. Generated; do not edit. */

#ifndef LCOR_H
#define LCOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code returned by every fallible function in this library.
 */
typedef enum LcorStatus {
  /**
   * The call succeeded.
   */
  LCOR_OK = 0,
  /**
   * A required pointer argument was null.
   */
  LCOR_NULL_POINTER = 1,
  /**
   * An argument was malformed (bad sizes, labels out of range, unknown
   * algorithm code, invalid configuration).
   */
  LCOR_INVALID_ARGUMENT = 2,
  /**
   * Training or evaluation failed after validation passed.
   */
  LCOR_TRAINING_ERROR = 3,
  /**
   * An internal invariant broke; the operation was aborted safely.
   */
  LCOR_PANIC = 4,
} LcorStatus;

/**
 * An immutable set of patterns with integer class labels.
 */
typedef struct LcorDataset LcorDataset;

/**
 * A trained linear classifier.
 */
typedef struct LcorModel LcorModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on the calling thread, or an
 * empty string if nothing failed yet. Valid until the next failing call on
 * this thread; never null.
 */
const char *lcor_last_error_message(void);

/**
 * Create a dataset from row-major features (`num_patterns` rows of
 * `num_features` doubles) and one label per pattern, each in
 * `[0, num_classes)`.
 *
 * # Safety
 * `features` must point to `num_patterns * num_features` readable doubles
 * and `labels` to `num_patterns` readable values; `out` must be writable.
 */
enum LcorStatus lcor_dataset_new(const double *features,
                                 const uint32_t *labels,
                                 uintptr_t num_patterns,
                                 uintptr_t num_features,
                                 uintptr_t num_classes,
                                 struct LcorDataset **out);

/**
 * Rescale every feature column to [0, 1] in place (min-max). Training
 * works on raw features too, but normalized inputs condition the solvers
 * far better; call this unless the data is already scaled. Idempotent.
 *
 * # Safety
 * `dataset` must be a live handle from [`lcor_dataset_new`].
 */
enum LcorStatus lcor_dataset_normalize(struct LcorDataset *dataset);

/**
 * Number of patterns, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
uintptr_t lcor_dataset_num_patterns(const struct LcorDataset *dataset);

/**
 * Destroy a dataset handle. Null is a no-op.
 *
 * # Safety
 * `dataset` must be null or a live handle; the handle is dead afterwards.
 */
void lcor_dataset_free(struct LcorDataset *dataset);

/**
 * Train a classifier.
 *
 * `algorithm`: 0 softmax cross-entropy, 1 least-squares with target
 * adjustment, 2 sigmoid MSE with target adjustment. `or_variant`:
 * 0 classic, 1 clamped, 2 error-proportional, 3 none. `iterations` of 0
 * selects the algorithm's default budget. `b` is the labeled-class target
 * amplitude (1.0 is the usual choice) and `seed` fixes every random
 * decision, so equal inputs give bit-equal models.
 *
 * # Safety
 * `train_data` and `validation` must be live dataset handles and `out`
 * writable.
 */
enum LcorStatus lcor_train(const struct LcorDataset *train_data,
                           const struct LcorDataset *validation,
                           uint32_t algorithm,
                           uint32_t or_variant,
                           uintptr_t iterations,
                           double b,
                           uint64_t seed,
                           struct LcorModel **out);

/**
 * Classification error of the model on a dataset, as a fraction in
 * [0, 1], written to `out_error_rate`.
 *
 * # Safety
 * `model` and `dataset` must be live handles; `out_error_rate` writable.
 */
enum LcorStatus lcor_model_error_rate(const struct LcorModel *model,
                                      const struct LcorDataset *dataset,
                                      double *out_error_rate);

/**
 * Classify one pattern of `num_features` doubles; the winning class index
 * goes to `out_label`.
 *
 * # Safety
 * `model` must be a live handle, `features` readable for `num_features`
 * doubles, `out_label` writable.
 */
enum LcorStatus lcor_model_predict(const struct LcorModel *model,
                                   const double *features,
                                   uintptr_t num_features,
                                   uint32_t *out_label);

/**
 * Number of classes the model separates, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t lcor_model_num_classes(const struct LcorModel *model);

/**
 * Iteration whose weights the model carries (the validation-best round).
 * Returns 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t lcor_model_best_iteration(const struct LcorModel *model);

/**
 * Destroy a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must be null or a live handle; the handle is dead afterwards.
 */
void lcor_model_free(struct LcorModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCOR_H */
