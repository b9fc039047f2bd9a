#ifndef CONCEPTREL_H
#define CONCEPTREL_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or an out-of-range enum value.
   */
  CR_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The library rejected the input (parameters or file contents).
   */
  CR_STATUS_VALIDATION = 2,
  /**
   * I/O or a numerical failure while computing.
   */
  CR_STATUS_RUNTIME = 3,
  /**
   * A bug: the call panicked.
   */
  CR_STATUS_PANIC = 4,
} CrStatus;

typedef enum CrMetric {
  CR_METRIC_EUCLIDEAN = 0,
  CR_METRIC_MANHATTAN = 1,
  CR_METRIC_COSINE = 2,
} CrMetric;

/**
 * Opaque concept basis handle.
 */
typedef struct CrBasis CrBasis;

/**
 * Opaque dataset handle.
 */
typedef struct CrDataset CrDataset;

/**
 * Opaque dendrogram handle.
 */
typedef struct CrDendrogram CrDendrogram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cr_version(void);

/**
 * Loads a dataset directory.
 */
enum CrStatus cr_dataset_load(const char *dir, struct CrDataset **out);

/**
 * Generates a digit/colour pairs dataset.
 */
enum CrStatus cr_dataset_gen_pairs(size_t n_digits,
                                   size_t n_samples,
                                   double correlation_rate,
                                   double feature_noise,
                                   uint64_t seed,
                                   struct CrDataset **out);

enum CrStatus cr_dataset_save(const struct CrDataset *d, const char *dir);

/**
 * Number of samples, or 0 for NULL.
 */
size_t cr_dataset_num_samples(const struct CrDataset *d);

/**
 * Number of concepts, or 0 for NULL.
 */
size_t cr_dataset_num_concepts(const struct CrDataset *d);

void cr_dataset_free(struct CrDataset *d);

enum CrStatus cr_basis_label(const struct CrDataset *d, struct CrBasis **out);

enum CrStatus cr_basis_concept2vec(const struct CrDataset *d,
                                   size_t embed_dim,
                                   size_t epochs,
                                   double learning_rate,
                                   size_t negatives_per_positive,
                                   uint64_t seed,
                                   struct CrBasis **out);

/**
 * Builds a basis from a row-major `k x dim` array and `k` concept names.
 */
enum CrStatus cr_basis_from_rows(const char *const *names,
                                 const double *vectors,
                                 size_t k,
                                 size_t dim,
                                 struct CrBasis **out);

/**
 * Reads a basis JSON file.
 */
enum CrStatus cr_basis_import(const char *path, struct CrBasis **out);

enum CrStatus cr_basis_export(const struct CrBasis *b, const char *path);

size_t cr_basis_num_concepts(const struct CrBasis *b);

size_t cr_basis_dim(const struct CrBasis *b);

/**
 * Copies the row-major vectors into `buf`, which must hold `k * dim`
 * doubles (`len` is checked).
 */
enum CrStatus cr_basis_vectors(const struct CrBasis *b, double *buf, size_t len);

void cr_basis_free(struct CrBasis *b);

/**
 * Distance between two bases over the same concepts; `metric` is a
 * [`CrMetric`] value.
 */
enum CrStatus cr_basis_distance(const struct CrBasis *a,
                                const struct CrBasis *b,
                                uint32_t metric,
                                size_t t,
                                double *out);

/**
 * Fraction of concepts whose nearest concept is their partner. `pairs`
 * holds `n_pairs` 0-based index pairs, flattened.
 */
enum CrStatus cr_concept_agreement(const struct CrBasis *b,
                                   const size_t *pairs,
                                   size_t n_pairs,
                                   uint32_t metric,
                                   double *out);

/**
 * Co-occurrence estimate of a binary label basis, written row-major into
 * `buf` (`k * k` doubles).
 */
enum CrStatus cr_estimate_cooccurrence(const struct CrBasis *b, double *buf, size_t len);

double cr_std_normal_cdf(double x);

enum CrStatus cr_ward_cluster(const struct CrBasis *b, struct CrDendrogram **out);

size_t cr_dendrogram_num_merges(const struct CrDendrogram *dg);

/**
 * Merge `i`: 1-based cluster ids (leaves first, then merges in order),
 * the Ward height and the merged cluster size.
 */
enum CrStatus cr_dendrogram_merge(const struct CrDendrogram *dg,
                                  size_t i,
                                  size_t *left,
                                  size_t *right,
                                  double *height,
                                  size_t *size);

enum CrStatus cr_dendrogram_export(const struct CrDendrogram *dg, const char *path);

void cr_dendrogram_free(struct CrDendrogram *dg);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONCEPTREL_H */
