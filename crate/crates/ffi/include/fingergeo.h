#ifndef FINGERGEO_H
#define FINGERGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Number of values in one feature row.
#define FG_FEATURE_COUNT 52

// Result of every fallible call.
typedef enum FgStatus {
  FG_STATUS_OK = 0,
  FG_STATUS_NULL_POINTER = 1,
  FG_STATUS_INVALID_ARGUMENT = 2,
  FG_STATUS_IO = 3,
  FG_STATUS_PARSE = 4,
  FG_STATUS_SEGMENTATION = 5,
  FG_STATUS_DATA = 6,
  FG_STATUS_PANIC = 99,
} FgStatus;

// Trained random forest.
typedef struct FgForest FgForest;

// Feature matrix read from CSV.
typedef struct FgMatrix FgMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *fg_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *fg_version(void);

// Segments an 8-bit grayscale image (row-major, `width * height` bytes)
// and writes the 52 features of index, middle, ring and little finger to
// `out`. `left_hand` mirrors the finger labels.
//
// # Safety
// `pixels` must point to `width * height` bytes and `out` to
// `FG_FEATURE_COUNT` doubles.
enum FgStatus fg_extract_features(const uint8_t *pixels,
                                  size_t width,
                                  size_t height,
                                  bool left_hand,
                                  double *out);

// Reads a feature matrix CSV (`subject_id,sample_id,<columns…>`).
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum FgStatus fg_matrix_read(const char *path, struct FgMatrix **out);

// Number of rows, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t fg_matrix_rows(const struct FgMatrix *m);

// Number of feature columns, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t fg_matrix_cols(const struct FgMatrix *m);

// Copies row `row` into `out`, which holds `fg_matrix_cols(m)` doubles.
//
// # Safety
// `m` must be a live handle and `out` large enough.
enum FgStatus fg_matrix_row(const struct FgMatrix *m, size_t row, double *out);

// # Safety
// `m` must be NULL or a handle not yet freed.
void fg_matrix_free(struct FgMatrix *m);

// Trains a forest on `rows × cols` row-major values with class ids in
// `labels`. `max_features` 0 means floor(sqrt(cols)).
//
// # Safety
// `x` must hold `rows * cols` doubles, `labels` `rows` entries and `out`
// must be valid.
enum FgStatus fg_forest_train(const double *x,
                              size_t rows,
                              size_t cols,
                              const size_t *labels,
                              size_t n_trees,
                              size_t max_features,
                              uint64_t seed,
                              struct FgForest **out);

// Predicted class of one row of `cols` values. `score`, if not NULL,
// receives the winning class's share of tree votes.
//
// # Safety
// `f` must be a live handle, `row` must hold `cols` doubles and `label`
// must be valid.
enum FgStatus fg_forest_predict(const struct FgForest *f,
                                const double *row,
                                size_t cols,
                                size_t *label,
                                double *score);

// Writes the model as JSON to `path`.
//
// # Safety
// `f` must be a live handle and `path` a NUL-terminated string.
enum FgStatus fg_forest_save(const struct FgForest *f, const char *path);

// Loads a model written by [`fg_forest_save`] or the CLI.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid.
enum FgStatus fg_forest_load(const char *path, struct FgForest **out);

// # Safety
// `f` must be NULL or a handle not yet freed.
void fg_forest_free(struct FgForest *f);

// Matching score between an enrolled template and a probe over `n`
// features; smaller is a better match. `per_term` selects division by each
// feature's mean instead of by the average mean.
//
// # Safety
// All four arrays must hold `n` doubles and `out` must be valid.
enum FgStatus fg_verification_score(const double *enrolled,
                                    const double *probe,
                                    const double *weights,
                                    const double *means,
                                    size_t n,
                                    bool per_term,
                                    double *out);

// Equal error rate of genuine and imposter score sets over `n_thresholds`
// evenly spaced thresholds plus the observed scores. `threshold`, if not
// NULL, receives the interpolated threshold at the EER.
//
// # Safety
// `genuine` must hold `n_genuine` and `imposter` `n_imposter` doubles;
// `eer` must be valid.
enum FgStatus fg_eer(const double *genuine,
                     size_t n_genuine,
                     const double *imposter,
                     size_t n_imposter,
                     size_t n_thresholds,
                     double *eer,
                     double *threshold);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINGERGEO_H */
