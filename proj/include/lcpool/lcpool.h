/* C interface of liblcpool: graph-classification training with local cluster
 * pooling, multi-run evaluation, ranking reports and the verification suite.
 *
 * Every function returns an lcp_status. On failure, lcp_last_error() holds a
 * message for the calling thread until its next failing call. Handles are
 * opaque; each *_create / *_load is paired with a *_free that accepts NULL.
 */
#ifndef LCPOOL_LCPOOL_H
#define LCPOOL_LCPOOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LCPOOL_BUILDING_LIBRARY)
#    define LCP_API __declspec(dllexport)
#  else
#    define LCP_API __declspec(dllimport)
#  endif
#else
#  define LCP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lcp_status {
  LCP_OK = 0,
  LCP_INVALID_ARGUMENT = 1,
  LCP_SHAPE_MISMATCH = 2,
  LCP_IO = 3,
  LCP_FORMAT = 4,
  LCP_PRECONDITION = 5,
  LCP_NUMERIC = 6,
  LCP_INTERNAL = 7
} lcp_status;

typedef struct lcp_dataset lcp_dataset;
typedef struct lcp_experiment lcp_experiment;
typedef struct lcp_results lcp_results;

LCP_API const char* lcp_version(void);
LCP_API const char* lcp_status_string(lcp_status status);
LCP_API const char* lcp_last_error(void);

/* ---- datasets --------------------------------------------------------- */

/* `name` is a TUDataset name read from `data_root` (e.g. "PROTEINS"), or
 * "synthetic:<kind>" with kind cycles_vs_paths or two_communities, in which
 * case `synthetic_graphs` graphs are generated from `seed` and `data_root`
 * is ignored. */
LCP_API lcp_status lcp_dataset_load(const char* name, const char* data_root,
                                    size_t synthetic_graphs, uint64_t seed,
                                    lcp_dataset** out);
LCP_API void lcp_dataset_free(lcp_dataset* dataset);

typedef struct lcp_dataset_info {
  const char* name; /* owned by the dataset handle */
  size_t graphs;
  size_t classes;
  size_t feature_dim;
  double average_nodes;
} lcp_dataset_info;

LCP_API lcp_status lcp_dataset_get_info(const lcp_dataset* dataset, lcp_dataset_info* info);

/* ---- experiments ------------------------------------------------------ */

/* An experiment holds one model configuration and the training settings.
 * Keys (values are strings):
 *   backbone    h | p | hierarchical | plain          (default h)
 *   conv        gcn | graphconv                       (gcn)
 *   pool        nopool | topk | sag | dense | lcpool | lcpool-star  (lcpool)
 *   ratio       (0, 1]                                (0.5)
 *   hidden      positive integer                      (128)
 *   runs        positive integer                      (10)
 *   seed        unsigned integer                      (0)
 *   max_epochs  positive integer                      (500)
 *   patience    positive integer                      (50)
 *   batch_size  positive integer                      (32)
 *   lr          positive real                         (0.0005)
 *   threads     positive integer                      (1)
 * Dashes and underscores are interchangeable in keys. */
LCP_API lcp_status lcp_experiment_create(lcp_experiment** out);
LCP_API void lcp_experiment_free(lcp_experiment* experiment);
LCP_API lcp_status lcp_experiment_set(lcp_experiment* experiment, const char* key,
                                      const char* value);

typedef struct lcp_run_info {
  const char* dataset;  /* strings are owned by the results handle */
  const char* backbone; /* "hierarchical" or "plain" */
  const char* conv;
  const char* pool;
  uint64_t run_seed;
  double test_accuracy;
  size_t best_epoch;
  size_t stop_epoch;
  double wall_time;
  int stalled; /* non-zero when validation never improved after epoch 1 */
} lcp_run_info;

/* Called after each finished run, from one thread at a time. */
typedef void (*lcp_run_callback)(const lcp_run_info* run, void* user);

/* Trains runs x (dataset, config) and appends the records to *out, which is
 * created when NULL on entry. */
LCP_API lcp_status lcp_experiment_run(const lcp_experiment* experiment,
                                      const lcp_dataset* dataset, lcp_run_callback callback,
                                      void* user, lcp_results** out);

/* ---- results ---------------------------------------------------------- */

LCP_API lcp_status lcp_results_create(lcp_results** out);
LCP_API void lcp_results_free(lcp_results* results);
/* Appends the records of a results JSON file. */
LCP_API lcp_status lcp_results_load(lcp_results* results, const char* path);
LCP_API lcp_status lcp_results_save(const lcp_results* results, const char* path);
LCP_API lcp_status lcp_results_count(const lcp_results* results, size_t* count);
LCP_API lcp_status lcp_results_get(const lcp_results* results, size_t index, lcp_run_info* info);

typedef struct lcp_summary_info {
  const char* backbone; /* "<backbone>/<conv>"; owned by the results handle */
  const char* pool;
  const char* dataset;
  size_t runs;
  double mean;
  double stddev;
} lcp_summary_info;

/* Mean and population standard deviation per (backbone, pool, dataset). */
LCP_API lcp_status lcp_results_summary_count(const lcp_results* results, size_t* count);
LCP_API lcp_status lcp_results_summary_get(const lcp_results* results, size_t index,
                                           lcp_summary_info* info);

LCP_API lcp_status lcp_results_write_summary_csv(const lcp_results* results, const char* path);
/* Average rank per (backbone, pool) over datasets; ties share ranks. */
LCP_API lcp_status lcp_results_write_ranking_csv(const lcp_results* results, const char* path);

/* ---- verification suite ----------------------------------------------- */

typedef enum lcp_check_status { LCP_CHECK_PASS = 0, LCP_CHECK_FAIL = 1, LCP_CHECK_SKIP = 2 } lcp_check_status;

typedef struct lcp_check_info {
  int id;
  const char* name;
  lcp_check_status status;
  int optional;
  const char* detail;
  double seconds;
  const char* line; /* one-line report */
} lcp_check_info;

typedef void (*lcp_check_callback)(const lcp_check_info* check, void* user);

/* Runs the checks whose ids (1..10) are set in `mask` as bit (id - 1); a
 * zero mask runs all of them. `data_root` may be NULL. *passed is non-zero
 * when no non-optional check failed. */
LCP_API lcp_status lcp_selftest(uint64_t seed, const char* data_root, uint32_t mask,
                                lcp_check_callback callback, void* user, int* passed);

#ifdef __cplusplus
}
#endif

#endif /* LCPOOL_LCPOOL_H */
