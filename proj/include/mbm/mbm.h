#ifndef MBM_MBM_H
#define MBM_MBM_H

#include <stddef.h>
#include <stdint.h>

#if defined(MBM_BUILDING_LIBRARY)
#define MBM_API __attribute__((visibility("default")))
#else
#define MBM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure the message is available
   from mbm_last_error() on the same thread until the next failing call. */
typedef enum mbm_status {
  MBM_OK = 0,
  MBM_ERR_INVALID_ARGUMENT = 1,
  MBM_ERR_IO = 2,
  MBM_ERR_PARSE = 3,
  MBM_ERR_VALIDATION = 4,
  MBM_ERR_BUDGET = 5,
  MBM_ERR_INTERNAL = 6
} mbm_status;

typedef struct mbm_network mbm_network;
typedef struct mbm_spec mbm_spec;
typedef struct mbm_fit mbm_fit;

MBM_API const char* mbm_version(void);
MBM_API const char* mbm_last_error(void);
/* Stable lowercase identifier, e.g. "validation". */
MBM_API const char* mbm_status_name(mbm_status status);

/* ---- networks ---- */

/* data_dir may be NULL, in which case edge files are resolved relative to the
   directory holding the config. */
MBM_API mbm_status mbm_network_load(const char* config_path, const char* data_dir, mbm_network** out);
MBM_API void mbm_network_free(mbm_network* net);
MBM_API size_t mbm_network_num_groups(const mbm_network* net);
MBM_API size_t mbm_network_num_matrices(const mbm_network* net);
/* 0 / NULL when q is out of range. */
MBM_API size_t mbm_network_group_size(const mbm_network* net, size_t q);
MBM_API const char* mbm_network_group_name(const mbm_network* net, size_t q);
MBM_API mbm_status mbm_network_write(const mbm_network* net, const char* dir);

/* ---- generator specs and simulation ---- */

/* which = 1 or 2 for the built-in scenarios. */
MBM_API mbm_status mbm_spec_scenario(int which, mbm_spec** out);
MBM_API mbm_status mbm_spec_load(const char* path, mbm_spec** out);
MBM_API void mbm_spec_free(mbm_spec* spec);
/* Draws one dataset with the given seed and writes it (config, edge CSVs,
   labels.csv, truth.json) to out_dir. */
MBM_API mbm_status mbm_simulate(const mbm_spec* spec, uint64_t seed, const char* out_dir);

/* ---- fitting ---- */

typedef struct mbm_fit_options {
  double tol;       /* relative ELBO change for convergence */
  int max_iter;     /* outer VEM iterations */
  double inner_tol; /* fixed-point tolerance of the VE-step */
  int max_inner;    /* fixed-point sweeps per VE-step */
} mbm_fit_options;

MBM_API void mbm_fit_options_default(mbm_fit_options* options);

typedef enum mbm_init_kind {
  MBM_INIT_ONES = 0,   /* every node in block 1 */
  MBM_INIT_LABELS = 1, /* labels file: group,node,block */
  MBM_INIT_RANDOM = 2  /* uniform random labels drawn from seed */
} mbm_init_kind;

/* options may be NULL for defaults; labels_path is only read for
   MBM_INIT_LABELS. */
MBM_API mbm_status mbm_fit_run(const mbm_network* net, const int* k, size_t n_k, mbm_init_kind init,
                               const char* labels_path, uint64_t seed, const mbm_fit_options* options, mbm_fit** out);

typedef struct mbm_search_options {
  const int* k_max;   /* per-group bound, NULL means 10 everywhere */
  size_t n_k_max;
  uint64_t seed;
  int workers;        /* concurrent candidate fits, <= 0 for all cores */
  int n_split_restarts;
  mbm_fit_options fit;
} mbm_search_options;

MBM_API void mbm_search_options_default(mbm_search_options* options);
MBM_API mbm_status mbm_search_run(const mbm_network* net, const mbm_search_options* options, mbm_fit** out);

MBM_API void mbm_fit_free(mbm_fit* fit);
MBM_API size_t mbm_fit_num_groups(const mbm_fit* fit);
MBM_API int mbm_fit_k(const mbm_fit* fit, size_t q);
MBM_API double mbm_fit_icl(const mbm_fit* fit);
MBM_API double mbm_fit_elbo(const mbm_fit* fit);
MBM_API int mbm_fit_converged(const mbm_fit* fit);
MBM_API int mbm_fit_iterations(const mbm_fit* fit);
/* NaN / -1 when an index is out of range. */
MBM_API double mbm_fit_pi(const mbm_fit* fit, size_t q, size_t k);
MBM_API double mbm_fit_alpha(const mbm_fit* fit, size_t matrix, size_t k, size_t l);
/* 1-based block of node i of group q. */
MBM_API int mbm_fit_label(const mbm_fit* fit, size_t q, size_t i);
/* Number of accepted search steps (0 for plain fits). */
MBM_API size_t mbm_fit_search_steps(const mbm_fit* fit);
/* Fit report; search results also get search_trace.csv and visited.csv. */
MBM_API mbm_status mbm_fit_write(const mbm_fit* fit, const char* dir);

/* ---- reports ---- */

MBM_API mbm_status mbm_evaluate(const char* const* fit_dirs, const char* const* truth_dirs, size_t count,
                                const char* out_dir);
/* format: "dot" or "json". */
MBM_API mbm_status mbm_export(const char* fit_dir, const char* format, double threshold, const char* out_path);
/* arguments_json: a JSON object recorded verbatim (NULL for {}). */
MBM_API mbm_status mbm_manifest_write(const char* out_dir, const char* command, const char* arguments_json);

#ifdef __cplusplus
}
#endif

#endif /* MBM_MBM_H */
