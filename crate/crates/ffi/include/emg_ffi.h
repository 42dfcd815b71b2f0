#ifndef EMG_FFI_H
#define EMG_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmgStatus {
  EMG_STATUS_OK = 0,
  EMG_STATUS_NULL_POINTER = 1,
  EMG_STATUS_INVALID_ARGUMENT = 2,
  EMG_STATUS_DATA_ERROR = 3,
  EMG_STATUS_NUMERICAL_ERROR = 4,
  EMG_STATUS_IO_ERROR = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  EMG_STATUS_INTERNAL_ERROR = 6,
} EmgStatus;

typedef enum EmgReducer {
  EMG_REDUCER_PCA = 0,
  EMG_REDUCER_LDA = 1,
} EmgReducer;

typedef enum EmgClassifierKind {
  EMG_CLASSIFIER_KIND_SVM = 0,
  EMG_CLASSIFIER_KIND_ANN = 1,
} EmgClassifierKind;

/**
 * Opaque trained classifier.
 */
typedef struct EmgClassifier EmgClassifier;

/**
 * Opaque dataset handle.
 */
typedef struct EmgDataset EmgDataset;

/**
 * Opaque fitted PCA/LDA projector.
 */
typedef struct EmgProjector EmgProjector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * owned by the library and valid until the next failing call on the thread.
 */
const char *emg_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void emg_string_free(char *s);

/**
 * Length of the default feature vector (30).
 */
size_t emg_feature_count(void);

/**
 * Default features of one two-channel trial of `n` samples per channel.
 * Writes [`emg_feature_count`] values to `out`, which holds `out_len`.
 *
 * # Safety
 * `a` and `b` must point to `n` doubles; `out` to `out_len` doubles.
 */
enum EmgStatus emg_extract_features(const double *a,
                                    const double *b,
                                    size_t n,
                                    double *out,
                                    size_t out_len);

/**
 * Loads a dataset tree (`s<subject>/c<class>/t<trial>.csv`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum EmgStatus emg_dataset_load(const char *path, struct EmgDataset **out);

/**
 * Generates a synthetic dataset with the default amplitude and noise.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EmgStatus emg_dataset_synth(size_t n_subjects,
                                 size_t n_classes,
                                 size_t n_trials,
                                 size_t samples_per_trial,
                                 uint64_t seed,
                                 struct EmgDataset **out);

/**
 * Number of recordings, or 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live handle.
 */
size_t emg_dataset_len(const struct EmgDataset *ds);

/**
 * # Safety
 * `ds` must be NULL or a handle not yet freed.
 */
void emg_dataset_free(struct EmgDataset *ds);

/**
 * Fits a projector on `rows × cols` data. `labels` is required for LDA and
 * may be NULL for PCA.
 *
 * # Safety
 * `x` must hold `rows * cols` doubles, `labels` (if used) `rows` values.
 */
enum EmgStatus emg_projector_fit(enum EmgReducer kind,
                                 const double *x,
                                 size_t rows,
                                 size_t cols,
                                 const uint32_t *labels_ptr,
                                 size_t k,
                                 bool standardize,
                                 struct EmgProjector **out);

/**
 * Output dimension `k`, or 0 for NULL.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t emg_projector_output_dim(const struct EmgProjector *p);

/**
 * Projects `rows × cols` data into `out` (`rows × k`, row-major).
 *
 * # Safety
 * `x` must hold `rows * cols` doubles and `out` `out_len` doubles.
 */
enum EmgStatus emg_projector_transform(const struct EmgProjector *p,
                                       const double *x,
                                       size_t rows,
                                       size_t cols,
                                       double *out,
                                       size_t out_len);

/**
 * # Safety
 * `p` must be NULL or a handle not yet freed.
 */
void emg_projector_free(struct EmgProjector *p);

/**
 * Trains a classifier with default hyperparameters and the given seed.
 *
 * # Safety
 * `x` must hold `rows * cols` doubles and `labels` `rows` values.
 */
enum EmgStatus emg_classifier_train(enum EmgClassifierKind kind,
                                    const double *x,
                                    size_t rows,
                                    size_t cols,
                                    const uint32_t *labels_ptr,
                                    size_t n_classes,
                                    uint64_t seed,
                                    struct EmgClassifier **out);

/**
 * Predicts one label per row into `out` (`rows` entries).
 *
 * # Safety
 * `x` must hold `rows * cols` doubles and `out` `rows` values.
 */
enum EmgStatus emg_classifier_predict(const struct EmgClassifier *c,
                                      const double *x,
                                      size_t rows,
                                      size_t cols,
                                      uint32_t *out);

/**
 * Serializes the model as JSON into a new string (free with
 * [`emg_string_free`]).
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum EmgStatus emg_classifier_to_json(const struct EmgClassifier *c, char **out);

/**
 * # Safety
 * `c` must be NULL or a handle not yet freed.
 */
void emg_classifier_free(struct EmgClassifier *c);

/**
 * Runs one pipeline evaluation. `config` uses the CLI's `key = value`
 * format and may be NULL or empty for defaults. `report_json` may be NULL;
 * otherwise it receives the report (free with [`emg_string_free`]).
 *
 * # Safety
 * `ds` must be a live handle; `config` NULL or NUL-terminated; `accuracy`
 * a valid pointer.
 */
enum EmgStatus emg_evaluate(const struct EmgDataset *ds,
                            const char *config,
                            double *accuracy,
                            char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMG_FFI_H */
