#ifndef CROWDREVIEW_H
#define CROWDREVIEW_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  CR_STATUS_NULL_ARGUMENT = 1,
  CR_STATUS_INVALID_UTF8 = 2,
  CR_STATUS_IO = 3,
  CR_STATUS_MISSING_ARTIFACT = 4,
  CR_STATUS_FORMAT = 5,
  CR_STATUS_INVALID_ARGUMENT = 6,
  CR_STATUS_UNSUPPORTED_LANGUAGE = 7,
  CR_STATUS_EMPTY_STORE = 8,
  CR_STATUS_NO_MATCHES = 9,
  CR_STATUS_INVALID_SCORE = 10,
  CR_STATUS_BUFFER_SIZE = 11,
  CR_STATUS_PANIC = 12,
  CR_STATUS_INTERNAL = 13,
} CrStatus;

/**
 * A loaded paragraph-vector model.
 */
typedef struct CrModel CrModel;

/**
 * A loaded vector store for one language with its defect scores.
 */
typedef struct CrStore CrStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *cr_last_error(void);

/**
 * Library version, static storage.
 */
const char *cr_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void cr_string_free(char *s);

/**
 * Load a model file into `*out_model`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_model` must be writable.
 */
enum CrStatus cr_model_load(const char *path, struct CrModel **out_model);

/**
 * # Safety
 * `model` must be null or a handle from [`cr_model_load`], freed once.
 */
void cr_model_free(struct CrModel *model);

/**
 * Vector length of the model, 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t cr_model_dim(const struct CrModel *model);

/**
 * Embed `code` into `out_vector[0..len]`; `len` must equal the model's
 * dimension. `out_low_confidence` may be null.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum CrStatus cr_model_infer(const struct CrModel *model,
                             const char *code,
                             float *out_vector,
                             size_t len,
                             bool *out_low_confidence);

/**
 * Open the vector store for `language` under `store_root`, with scores.
 *
 * # Safety
 * Strings must be NUL-terminated; `out_store` must be writable.
 */
enum CrStatus cr_store_open(const char *store_root,
                            const char *language,
                            struct CrStore **out_store);

/**
 * # Safety
 * `store` must be null or a handle from [`cr_store_open`], freed once.
 */
void cr_store_free(struct CrStore *store);

/**
 * Number of indexed vectors, 0 for a null handle.
 *
 * # Safety
 * `store` must be null or a live handle.
 */
size_t cr_store_len(const struct CrStore *store);

/**
 * Review `source` and write the verdict (-1, 1 or 300). When `out_json`
 * is not null it receives the JSON report, to be freed with
 * [`cr_string_free`].
 *
 * # Safety
 * Handles must be live; strings NUL-terminated; out pointers writable or
 * null where allowed.
 */
enum CrStatus cr_review_source(const struct CrModel *model,
                               const struct CrStore *store,
                               const char *file_name,
                               const char *source,
                               size_t k,
                               bool conservative,
                               int32_t *out_verdict,
                               char **out_json);

/**
 * Defect score of a post: `post_type` is 1 (question) or 2 (answer),
 * `narrative` the text preceding the code.
 *
 * # Safety
 * `narrative` must be NUL-terminated; `out_score` writable.
 */
enum CrStatus cr_estimate(uint32_t post_type,
                          double score,
                          const char *narrative,
                          int32_t *out_score);

/**
 * Mode of `votes[0..len]` with ties toward -1, then 300. With
 * `conservative`, any -1 wins.
 *
 * # Safety
 * `votes` must hold `len` values; `out_verdict` writable.
 */
enum CrStatus cr_majority_vote(const int32_t *votes,
                               size_t len,
                               bool conservative,
                               int32_t *out_verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWDREVIEW_H */
