#ifndef SPLITER_H
#define SPLITER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call.
typedef enum Status {
  STATUS_OK = 0,
  // A pointer argument was null.
  STATUS_NULL_POINTER = 1,
  // Arguments were structurally invalid (bad sizes, unknown ids).
  STATUS_INVALID_ARGUMENT = 2,
  // The runtime reported a failure while executing the call.
  STATUS_RUNTIME_ERROR = 3,
} Status;

// Dataset generator selector for [`spliter_array_create`].
typedef enum ArrayKind {
  // Coordinates uniform in [0, 1).
  ARRAY_KIND_UNIFORM = 0,
  // Two Gaussian blobs, unit spread, alternating by row.
  ARRAY_KIND_TWO_BLOBS = 1,
  // +1 / -1 label column by row parity.
  ARRAY_KIND_BLOB_LABELS = 2,
} ArrayKind;

// Benchmark application selector.
typedef enum App {
  APP_HISTOGRAM = 0,
  APP_KMEANS = 1,
  APP_CSVM = 2,
  APP_KNN = 3,
} App;

// Execution mode selector.
typedef enum RunMode {
  RUN_MODE_BASELINE = 0,
  RUN_MODE_SPLITER = 1,
  RUN_MODE_RECHUNK = 2,
} RunMode;

// Opaque blocked-array handle, tied to the runtime that created it.
typedef struct SpliterArray SpliterArray;

// Opaque partition list produced by [`spliter_split`].
typedef struct SpliterPartitions SpliterPartitions;

// Opaque runtime handle.
typedef struct SpliterRuntime SpliterRuntime;

// Runtime knobs; `bandwidth_bytes_per_sec == 0` means unlimited.
typedef struct SpliterRuntimeConfig {
  uint64_t num_workers;
  uint64_t threads_per_worker;
  uint64_t sched_overhead_ns;
  uint64_t bandwidth_bytes_per_sec;
  uint64_t latency_ns;
  bool inject_real_overhead;
} SpliterRuntimeConfig;

// Counter snapshot.
typedef struct SpliterMetrics {
  uint64_t tasks_submitted;
  uint64_t bytes_transferred;
  uint64_t transfers;
  uint64_t locality_hits;
  uint64_t accounted_overhead_ns;
  uint64_t virtual_transfer_ns;
} SpliterMetrics;

// Full description of one benchmark cell.
// `bandwidth_bytes_per_sec == 0` means unlimited.
typedef struct SpliterAppParams {
  enum App app;
  enum RunMode mode;
  uint64_t workers;
  uint64_t threads_per_worker;
  uint64_t blocks_per_worker;
  uint64_t block_rows;
  uint64_t dims;
  uint64_t seed;
  uint64_t partitions_per_worker;
  uint64_t sched_overhead_ns;
  uint64_t bandwidth_bytes_per_sec;
  uint64_t latency_ns;
  uint64_t bins;
  uint64_t k;
  uint64_t iters;
  double svm_c;
  uint64_t cascade_max_iter;
  uint64_t knn_k;
  uint64_t query_blocks_per_worker;
} SpliterAppParams;

// Deterministic counters plus wall time of one app run.
typedef struct SpliterAppStats {
  struct SpliterMetrics metrics;
  uint64_t map_tasks;
  uint64_t map_bytes;
  uint64_t result_checksum;
  double wall_ms;
} SpliterAppStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failing call on this thread. The pointer is
// valid until the next failing call; never free it.
const char *spliter_last_error(void);

// Start a runtime.
//
// # Safety
// `config` and `out` must be valid pointers; `*out` is overwritten on
// success with a handle that must be released via [`spliter_runtime_free`].
enum Status spliter_runtime_new(const struct SpliterRuntimeConfig *config,
                                struct SpliterRuntime **out);

// Release a runtime handle. Safe to call with null.
//
// # Safety
// `rt` must be null or a pointer from [`spliter_runtime_new`], not yet freed.
void spliter_runtime_free(struct SpliterRuntime *rt);

// Snapshot the runtime counters.
//
// # Safety
// `rt` and `out` must be valid pointers.
enum Status spliter_runtime_metrics(const struct SpliterRuntime *rt, struct SpliterMetrics *out);

// Create a seeded dataset, blocks placed round-robin.
//
// # Safety
// `rt` and `out` must be valid pointers; the handle written to `*out` must
// be released via [`spliter_array_free`] before the runtime is freed.
enum Status spliter_array_create(const struct SpliterRuntime *rt,
                                 enum ArrayKind kind,
                                 uint64_t n_rows,
                                 uint64_t dims,
                                 uint64_t block_rows,
                                 uint64_t seed,
                                 struct SpliterArray **out);

// Release an array handle. Safe to call with null.
//
// # Safety
// `arr` must be null or a pointer from an array-producing call, not yet freed.
void spliter_array_free(struct SpliterArray *arr);

// Number of blocks of an array.
//
// # Safety
// `arr` and `out` must be valid pointers.
enum Status spliter_array_n_blocks(const struct SpliterArray *arr, uint64_t *out);

// Worker id of every block, in block order. `cap` is the capacity of
// `out_workers`; the call fails if it is too small.
//
// # Safety
// `rt` and `arr` must be valid; `out_workers` must point to `cap` writable
// `uint64_t`s.
enum Status spliter_array_block_locations(const struct SpliterRuntime *rt,
                                          const struct SpliterArray *arr,
                                          uint64_t *out_workers,
                                          uint64_t cap);

// Order-sensitive content digest of an array.
//
// # Safety
// `rt`, `arr` and `out` must be valid pointers.
enum Status spliter_array_checksum(const struct SpliterRuntime *rt,
                                   const struct SpliterArray *arr,
                                   uint64_t *out);

// Materialize the array under a new block size (see the core semantics:
// same-size rechunk is a free no-op; otherwise transfers are counted).
//
// # Safety
// `rt`, `arr` and `out` must be valid pointers; `*out` must be released
// via [`spliter_array_free`].
enum Status spliter_array_rechunk(const struct SpliterRuntime *rt,
                                  const struct SpliterArray *arr,
                                  uint64_t new_block_rows,
                                  struct SpliterArray **out);

// Block rows that give one block per worker thread.
//
// # Safety
// `rt` and `out` must be valid pointers.
enum Status spliter_balanced_block_rows(const struct SpliterRuntime *rt,
                                        uint64_t n_rows,
                                        uint64_t *out);

// Build worker-local partitions without moving any data.
//
// # Safety
// `rt`, `arr` and `out` must be valid pointers; `*out` must be released
// via [`spliter_partitions_free`].
enum Status spliter_split(const struct SpliterRuntime *rt,
                          const struct SpliterArray *arr,
                          uint64_t partitions_per_worker,
                          struct SpliterPartitions **out);

// Release a partition list. Safe to call with null.
//
// # Safety
// `parts` must be null or a pointer from [`spliter_split`], not yet freed.
void spliter_partitions_free(struct SpliterPartitions *parts);

// Number of partitions in the list.
//
// # Safety
// `parts` must be a valid pointer.
uint64_t spliter_partitions_count(const struct SpliterPartitions *parts);

// Worker that owns partition `index`.
//
// # Safety
// `parts` and `out` must be valid pointers.
enum Status spliter_partition_worker(const struct SpliterPartitions *parts,
                                     uint64_t index,
                                     uint64_t *out);

// Copy the global block indexes of partition `index` into `buf`
// (`cap` capacity); writes the count to `written`.
//
// # Safety
// `parts` and `written` must be valid; `buf` must point to `cap` writable
// `uint64_t`s.
enum Status spliter_partition_indexes(const struct SpliterPartitions *parts,
                                      uint64_t index,
                                      uint64_t *buf,
                                      uint64_t cap,
                                      uint64_t *written);

// Copy the global row index of every item in partition `index` into `buf`.
//
// # Safety
// Same contract as [`spliter_partition_indexes`].
enum Status spliter_partition_item_indexes(const struct SpliterPartitions *parts,
                                           uint64_t index,
                                           uint64_t *buf,
                                           uint64_t cap,
                                           uint64_t *written);

// Fill `out` with the default cell parameters of an app.
//
// # Safety
// `out` must be a valid pointer.
enum Status spliter_app_params_default(enum App app,
                                       enum RunMode mode,
                                       struct SpliterAppParams *out);

// Run one benchmark cell end to end (its runtime is created and torn down
// internally) and write the counters to `out`.
//
// # Safety
// `params` and `out` must be valid pointers.
enum Status spliter_app_run(const struct SpliterAppParams *params, struct SpliterAppStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPLITER_H */
