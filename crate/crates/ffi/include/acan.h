#ifndef ACAN_H
#define ACAN_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AcanScheme {
  ACAN_SCHEME_GRL = 0,
  ACAN_SCHEME_OCE = 1,
  ACAN_SCHEME_ACE = 2,
  ACAN_SCHEME_NONE = 3,
} AcanScheme;

typedef enum AcanStatus {
  ACAN_STATUS_OK = 0,
  ACAN_STATUS_NULL_POINTER = 1,
  ACAN_STATUS_INVALID_ARGUMENT = 2,
  ACAN_STATUS_INVALID_CONFIG = 3,
  ACAN_STATUS_DIMENSION = 4,
  ACAN_STATUS_PARSE = 5,
  ACAN_STATUS_IO = 6,
  ACAN_STATUS_INVALID_DATASET = 7,
  ACAN_STATUS_NON_FINITE = 8,
  ACAN_STATUS_EMPTY_SET = 9,
  ACAN_STATUS_DIVERGENCE = 10,
  ACAN_STATUS_STALE_CACHE = 11,
  ACAN_STATUS_PANIC = 12,
} AcanStatus;

/**
 * Opaque dataset handle.
 */
typedef struct AcanDataset AcanDataset;

/**
 * Opaque trained-model handle.
 */
typedef struct AcanModel AcanModel;

/**
 * Synthetic dataset parameters.
 */
typedef struct AcanSynthOptions {
  size_t cameras;
  size_t identities_per_camera;
  size_t samples_per_identity;
  size_t input_dim;
  double identity_spread;
  double camera_shift_scale;
  size_t cross_camera_overlap;
  uint64_t seed;
} AcanSynthOptions;

/**
 * The training hyperparameters exposed over the C ABI. Everything else
 * keeps its library default.
 */
typedef struct AcanTrainOptions {
  enum AcanScheme scheme;
  double lambda;
  double margin;
  size_t persons;
  size_t images_per_person;
  /**
   * Camera-balanced batch size before division by the camera count.
   */
  size_t adversarial_batch_base;
  size_t epochs;
  double learning_rate;
  /**
   * `num_lr_decay_epochs` epochs at which the rate is multiplied by the
   * decay factor; may be null when the count is 0.
   */
  const size_t *lr_decay_epochs;
  size_t num_lr_decay_epochs;
  double lr_decay_factor;
  uint64_t seed;
} AcanTrainOptions;

/**
 * Headline numbers of one evaluation.
 */
typedef struct AcanEvalSummary {
  double map;
  double rank1;
  double rank5;
  double rank10;
  double d_inter_camera;
  double off_diagonal_uniformity;
  size_t num_queries;
} AcanEvalSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *acan_last_error_message(void);

/**
 * Default synthetic dataset parameters.
 */
struct AcanSynthOptions acan_synth_options_default(void);

/**
 * Default training options for `scheme`. The decay schedule points at
 * static storage.
 */
struct AcanTrainOptions acan_train_options_default(enum AcanScheme scheme);

/**
 * # Safety
 * `options` must be null or valid; `out` must be null or writable.
 */
enum AcanStatus acan_dataset_synthesize(const struct AcanSynthOptions *options,
                                        struct AcanDataset **out);

/**
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
enum AcanStatus acan_dataset_load_csv(const char *path, struct AcanDataset **out);

/**
 * # Safety
 * `ds` must be null or a live dataset handle; `path` must be null or a
 * NUL-terminated string.
 */
enum AcanStatus acan_dataset_save_csv(const struct AcanDataset *ds, const char *path);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t acan_dataset_len(const struct AcanDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t acan_dataset_num_cameras(const struct AcanDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t acan_dataset_input_dim(const struct AcanDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void acan_dataset_free(struct AcanDataset *ds);

/**
 * Trains a model on the train split of `ds`.
 *
 * # Safety
 * `ds` and `options` must be null or valid, `options.lr_decay_epochs` must
 * point to `num_lr_decay_epochs` values, and `out` must be null or writable.
 */
enum AcanStatus acan_train(const struct AcanDataset *ds,
                           const struct AcanTrainOptions *options,
                           struct AcanModel **out);

/**
 * # Safety
 * `model` must be null or a live model handle; `path` must be null or a
 * NUL-terminated string.
 */
enum AcanStatus acan_model_save(const struct AcanModel *model, const char *path);

/**
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
enum AcanStatus acan_model_load(const char *path, struct AcanModel **out);

/**
 * Embedding width, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t acan_model_embedding_dim(const struct AcanModel *model);

/**
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t acan_model_input_dim(const struct AcanModel *model);

/**
 * Embeds `rows` row-major feature vectors of width `cols` into `out`, which
 * must hold `out_len >= rows * embedding_dim` values.
 *
 * # Safety
 * `features` must point to `rows * cols` readable doubles and `out` to
 * `out_len` writable doubles.
 */
enum AcanStatus acan_model_embed(const struct AcanModel *model,
                                 const double *features,
                                 size_t rows,
                                 size_t cols,
                                 double *out,
                                 size_t out_len);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void acan_model_free(struct AcanModel *model);

/**
 * Evaluates `model` on `ds` under the cross-camera protocol.
 *
 * # Safety
 * `model` and `ds` must be null or live handles; `out` must be null or
 * writable.
 */
enum AcanStatus acan_evaluate(const struct AcanModel *model,
                              const struct AcanDataset *ds,
                              struct AcanEvalSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACAN_H */
