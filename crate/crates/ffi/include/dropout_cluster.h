#ifndef DROPOUT_CLUSTER_H
#define DROPOUT_CLUSTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DcStatus {
  DC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The input data cannot be used (malformed, empty, too few points).
   */
  DC_STATUS_DATA = 3,
  DC_STATUS_IO = 4,
  /**
   * The library panicked; the call had no effect.
   */
  DC_STATUS_PANIC = 5,
} DcStatus;

typedef enum DcAlgorithm {
  DC_ALGORITHM_CLASSIC_KMEANS = 0,
  DC_ALGORITHM_DROPOUT_KMEANS = 1,
  DC_ALGORITHM_STOCHASTIC_DROPOUT_KMEANS = 2,
  DC_ALGORITHM_CLASSIC_KMEDIAN = 3,
  DC_ALGORITHM_DROPOUT_KMEDIAN = 4,
} DcAlgorithm;

typedef struct DcCenters DcCenters;

/**
 * Planar points in km with their ship grouping.
 */
typedef struct DcDataset DcDataset;

typedef struct DcRunResult DcRunResult;

/**
 * Settings for [`dc_run`]. Obtain defaults from [`dc_run_params_default`].
 */
typedef struct DcRunParams {
  double p;
  /**
   * Detection radius in km, used by the stochastic baseline.
   */
  double radius_km;
  size_t max_iters;
  size_t stochastic_max_iters;
  size_t inner_iters;
  double weiszfeld_tol;
  uint64_t seed;
} DcRunParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a
 * successful one. The pointer stays valid until the next call on the thread.
 */
const char *dc_last_error_message(void);

/**
 * Builds a dataset from `n` points. `ship_ids` may be null, in which case
 * every point is its own ship.
 *
 * # Safety
 * `xs`, `ys` and a non-null `ship_ids` must point to `n` readable values.
 */
enum DcStatus dc_dataset_from_arrays(const double *xs,
                                     const double *ys,
                                     const uint64_t *ship_ids,
                                     size_t n,
                                     struct DcDataset **out);

/**
 * Reads a planar point cache (`ship_id,x_km,y_km`) or an AIS table with the
 * default column names, projected about the centroid of its points.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum DcStatus dc_dataset_from_csv(const char *path, struct DcDataset **out);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t dc_dataset_len(const struct DcDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t dc_dataset_num_ships(const struct DcDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void dc_dataset_free(struct DcDataset *dataset);

/**
 * # Safety
 * `xs` and `ys` must point to `k` readable values.
 */
enum DcStatus dc_centers_new(const double *xs, const double *ys, size_t k, struct DcCenters **out);

/**
 * # Safety
 * `centers` must be null or a live handle.
 */
size_t dc_centers_len(const struct DcCenters *centers);

/**
 * # Safety
 * `centers` must be a live handle; `x` and `y` must be writable.
 */
enum DcStatus dc_centers_get(const struct DcCenters *centers, size_t index, double *x, double *y);

/**
 * # Safety
 * `centers` must be null or a handle not yet freed.
 */
void dc_centers_free(struct DcCenters *centers);

/**
 * k-means++ initial centers drawn from the dataset points.
 *
 * # Safety
 * `dataset` must be a live handle.
 */
enum DcStatus dc_kmeanspp(const struct DcDataset *dataset,
                          size_t k,
                          uint64_t seed,
                          struct DcCenters **out);

struct DcRunParams dc_run_params_default(void);

/**
 * Runs one algorithm from `init`.
 *
 * # Safety
 * `dataset`, `init` and `params` must be live handles or valid pointers.
 */
enum DcStatus dc_run(const struct DcDataset *dataset,
                     enum DcAlgorithm algorithm,
                     const struct DcCenters *init,
                     const struct DcRunParams *params,
                     struct DcRunResult **out);

/**
 * Copies the final centers of a run into a new handle.
 *
 * # Safety
 * `result` must be a live handle.
 */
enum DcStatus dc_run_result_centers(const struct DcRunResult *result, struct DcCenters **out);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t dc_run_result_iterations(const struct DcRunResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
bool dc_run_result_converged(const struct DcRunResult *result);

/**
 * Final objective value of the run.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double dc_run_result_objective(const struct DcRunResult *result);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void dc_run_result_free(struct DcRunResult *result);

/**
 * Writes the `k` rank weights `p^j (1 - p)` into `out`.
 *
 * # Safety
 * `out` must have room for `k` values.
 */
enum DcStatus dc_survival_weights(size_t k, double p, double *out);

/**
 * Probability that a ship of the dataset is detected by a surviving center
 * within `radius_km`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum DcStatus dc_detection_probability(const struct DcDataset *dataset,
                                       const struct DcCenters *centers,
                                       double p,
                                       double radius_km,
                                       double *out);

/**
 * Root-mean-square distance to the nearest surviving center.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum DcStatus dc_dropout_rmsd(const struct DcDataset *dataset,
                              const struct DcCenters *centers,
                              double p,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DROPOUT_CLUSTER_H */
