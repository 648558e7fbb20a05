/* Public C interface of the mosto library. All handles are opaque; every
 * fallible call returns a mosto_status and leaves a message for
 * mosto_last_error() on the calling thread. */
#ifndef MOSTO_MOSTO_H
#define MOSTO_MOSTO_H

#include <stddef.h>
#include <stdint.h>

#if defined(MOSTO_BUILDING_LIBRARY)
#define MOSTO_API __attribute__((visibility("default")))
#else
#define MOSTO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mosto_status {
  MOSTO_OK = 0,
  MOSTO_ERR_INPUT = 1,     /* malformed or invalid input data */
  MOSTO_ERR_INVARIANT = 2, /* a computed result failed its self-check */
  MOSTO_ERR_DIVERGED = 3,  /* simulation hit its event or time budget */
  MOSTO_ERR_IO = 4,
  MOSTO_ERR_ARGUMENT = 5,  /* null handle, bad enum value, buffer too small */
  MOSTO_ERR_INTERNAL = 6
} mosto_status;

MOSTO_API const char* mosto_last_error(void);
MOSTO_API const char* mosto_version(void);

typedef struct mosto_graph mosto_graph;
typedef struct mosto_mesh mosto_mesh;
typedef struct mosto_front mosto_front;
typedef struct mosto_table mosto_table;

/* Proxy graph: "node <index> [<name>]" lines, then "link <i> <j> <rtt_ms>". */
MOSTO_API mosto_status mosto_graph_parse(const char* text, mosto_graph** out);
MOSTO_API mosto_status mosto_graph_load(const char* path, mosto_graph** out);
MOSTO_API size_t mosto_graph_node_count(const mosto_graph* g);
MOSTO_API void mosto_graph_free(mosto_graph* g);

/* Full-mesh RTT matrix (shortest-path delays of the graph). */
MOSTO_API mosto_status mosto_mesh_build(const mosto_graph* g, mosto_mesh** out);
MOSTO_API mosto_status mosto_mesh_from_ms(size_t n, const double* rows_ms, mosto_mesh** out);
MOSTO_API mosto_status mosto_mesh_load_csv(const char* path, mosto_mesh** out);
MOSTO_API mosto_status mosto_mesh_save_csv(const mosto_mesh* m, const char* path);
MOSTO_API size_t mosto_mesh_size(const mosto_mesh* m);
/* RTT in ms; NaN for a null handle or out-of-range index. */
MOSTO_API double mosto_mesh_get(const mosto_mesh* m, uint32_t i, uint32_t j);
MOSTO_API void mosto_mesh_free(mosto_mesh* m);

typedef enum mosto_algorithm { MOSTO_ALGO_OPTIMIZED = 0, MOSTO_ALGO_BASELINE = 1 } mosto_algorithm;

typedef struct mosto_front_stats {
  uint64_t iterations;
  uint64_t pair_checks;
  uint64_t max_pair_checks;
  uint64_t state_updates;
  uint64_t entries;
  double elapsed_ms;
} mosto_front_stats;

/* Pareto fronts for all ordered pairs. stats may be NULL. */
MOSTO_API mosto_status mosto_front_compute(const mosto_mesh* m, mosto_algorithm algo, mosto_front** out,
                                           mosto_front_stats* stats);
MOSTO_API int mosto_front_equal(const mosto_front* a, const mosto_front* b);
MOSTO_API size_t mosto_front_entry_count(const mosto_front* f);
MOSTO_API size_t mosto_front_list_size(const mosto_front* f, uint32_t i, uint32_t j);
/* Entry k of the (i, j) list, ordered by increasing bottleneck. */
MOSTO_API mosto_status mosto_front_get(const mosto_front* f, uint32_t i, uint32_t j, size_t k, uint32_t* hops,
                                       size_t hops_cap, size_t* hop_count, double* length_ms, double* max_link_ms);
MOSTO_API mosto_status mosto_front_save(const mosto_front* f, const char* path);
MOSTO_API void mosto_front_free(mosto_front* f);

typedef struct mosto_transfer_model {
  int icw;        /* initial congestion window, segments */
  int mss;        /* bytes */
  int max_rounds; /* table depth */
} mosto_transfer_model;

MOSTO_API mosto_transfer_model mosto_transfer_model_default(void);
MOSTO_API mosto_status mosto_rounds_for_size(const mosto_transfer_model* m, uint64_t size, int* rounds);

MOSTO_API mosto_status mosto_table_build(const mosto_front* f, const mosto_transfer_model* m, mosto_table** out);
MOSTO_API mosto_status mosto_table_load(const char* path, mosto_table** out);
MOSTO_API mosto_status mosto_table_save(const mosto_table* t, const char* path);
MOSTO_API void mosto_table_free(mosto_table* t);

typedef struct mosto_chain_info {
  int rounds;
  size_t hop_count;
  double modeled_ms;
  uint64_t generation;
} mosto_chain_info;

/* Chain for a transfer of size bytes. When hops_cap is too small the call
 * fails with MOSTO_ERR_ARGUMENT but still sets info->hop_count. */
MOSTO_API mosto_status mosto_table_lookup(const mosto_table* t, uint32_t from, uint32_t to, uint64_t size,
                                          uint32_t* hops, size_t hops_cap, mosto_chain_info* info);

/* Writes the per-pair comparison against minimax chains and its CDF. summary
 * (may be NULL) receives a NUL-terminated text summary, truncated to cap. */
MOSTO_API mosto_status mosto_compare_write(const mosto_front* f, const int* rounds, size_t rounds_count,
                                           const char* csv_path, const char* cdf_path, char* summary,
                                           size_t summary_cap);

/* Modeled and simulated completion time of a lossless transfer over the
 * given chain of mesh locations. */
MOSTO_API mosto_status mosto_chain_time(const mosto_mesh* m, const uint32_t* hops, size_t hop_count, uint64_t size,
                                        const mosto_transfer_model* model, double* modeled_ms, double* simulated_ms);

typedef struct mosto_sim_summary {
  int completed;
  double completion_ms;
  uint64_t bytes_delivered;
  int stream_intact;
  uint64_t retransmissions;
  uint64_t rto_events;
  uint64_t duplicate_segments;
  uint64_t bad_checksums;
  int offload_enabled;
  int offloaded;
  double offload_ms;
  uint64_t proxy_segments_after_offload;
  double goodput_pre_bps;
  double goodput_post_bps;
} mosto_sim_summary;

/* Runs a scenario file. seed may be NULL to keep the file's seed; trace_path
 * may be NULL. text (may be NULL) receives a key: value summary. */
MOSTO_API mosto_status mosto_simulate_file(const char* scenario_path, const uint64_t* seed, const char* trace_path,
                                           mosto_sim_summary* out, char* text, size_t text_cap);

/* Runs the controller daemon described by a config file until its input
 * ends or its generation limit is reached. */
MOSTO_API mosto_status mosto_controller_run(const char* config_path);

#ifdef __cplusplus
}
#endif

#endif
