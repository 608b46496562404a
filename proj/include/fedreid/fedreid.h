/**
 * Copyright 2026 The FedReID-Sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the federated re-identification simulator.
 *
 * Every function returns an fr_status; on failure fr_last_error() holds a
 * message for the calling thread until its next failing call. Handles are
 * opaque and released with their matching *_free function. Strings returned
 * through char** out-parameters are heap-allocated and released with
 * fr_string_free.
 */

#ifndef FEDREID_FEDREID_H_
#define FEDREID_FEDREID_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FR_API __declspec(dllexport)
#else
#define FR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fr_status {
  FR_OK = 0,
  FR_ERR_INVALID_ARGUMENT = 1,
  FR_ERR_DIMENSION = 2,
  FR_ERR_EMPTY_AGGREGATION = 3,
  FR_ERR_DEGENERATE_VECTOR = 4,
  FR_ERR_SELECTION = 5,
  FR_ERR_LABEL = 6,
  FR_ERR_DIVERGENCE = 7,
  FR_ERR_BATCH_SIZE = 8,
  FR_ERR_CONFIG = 9,
  FR_ERR_PARTITION = 10,
  FR_ERR_DISTILLATION = 11,
  FR_ERR_AGGREGATION = 12,
  FR_ERR_IO = 13,
  FR_ERR_FORMAT = 14,
  FR_ERR_RUNTIME = 15,
  FR_ERR_INTERNAL = 99
} fr_status;

typedef enum fr_log_level {
  FR_LOG_DEBUG = 0,
  FR_LOG_INFO = 1,
  FR_LOG_WARNING = 2,
  FR_LOG_ERROR = 3,
  FR_LOG_OFF = 4
} fr_log_level;

typedef enum fr_run_kind { FR_RUN_FEDERATED = 0, FR_RUN_STANDALONE = 1, FR_RUN_CENTRALIZED = 2 } fr_run_kind;

typedef struct fr_config fr_config;
typedef struct fr_world fr_world;
typedef struct fr_report fr_report;

typedef struct fr_client_metrics {
  int client;
  size_t volume;
  double global_rank1, global_rank5, global_rank10, global_map;
  double local_rank1, local_rank5, local_rank10, local_map;
} fr_client_metrics;

FR_API const char *fr_version(void);
FR_API const char *fr_status_name(fr_status status);
FR_API const char *fr_last_error(void);
FR_API void fr_string_free(char *s);
FR_API fr_status fr_set_log_level(fr_log_level level);
FR_API size_t fr_warning_count(void);

/* Configuration. `path` may be NULL for the built-in defaults; overrides
 * are "key.path=value" strings applied before validation. */
FR_API fr_status fr_config_load(const char *path, const char *const *overrides, size_t override_count,
                                fr_config **out);
FR_API fr_status fr_config_to_json(const fr_config *config, char **out);
FR_API void fr_config_free(fr_config *config);

/* Worlds. */
FR_API fr_status fr_world_generate(const fr_config *config, fr_world **out);
FR_API fr_status fr_world_load(const char *path, fr_world **out);
FR_API fr_status fr_world_save(const fr_world *world, const char *path);
/* 16 hex digits plus the terminating NUL. */
FR_API fr_status fr_world_hash(const fr_world *world, char out[17]);
FR_API size_t fr_world_client_count(const fr_world *world);
FR_API void fr_world_free(fr_world *world);

/* Runs. `out_dir` may be NULL to skip writing artifacts. */
FR_API fr_status fr_run(const fr_config *config, const fr_world *world, fr_run_kind kind, const char *out_dir,
                        fr_report **out);
FR_API size_t fr_report_client_count(const fr_report *report);
FR_API fr_status fr_report_client(const fr_report *report, size_t index, fr_client_metrics *out);
FR_API int fr_report_aggregations(const fr_report *report);
FR_API uint64_t fr_report_communication_per_client(const fr_report *report);
FR_API uint64_t fr_report_communication_total(const fr_report *report);
FR_API fr_status fr_report_table(const fr_report *report, char **out);
FR_API fr_status fr_report_to_json(const fr_report *report, char **out);
FR_API void fr_report_free(fr_report *report);

/* Rank-1 deltas of runs[1..] (and runs[0] itself) against runs[0].
 * `model` is "local" or "global". */
FR_API fr_status fr_compare(const char *const *run_dirs, size_t count, const char *model, char **table_out);
FR_API fr_status fr_eval_checkpoint(const char *checkpoint_path, const fr_world *world, char **table_out);

/* Primitives. */
FR_API fr_status fr_cosine_distance(const double *a, const double *b, size_t length, double *out);
FR_API fr_status fr_cdw_weights(const double *distances, size_t count, double *weights_out);
/* vectors is count x length row-major. */
FR_API fr_status fr_weighted_sum(const double *vectors, size_t count, size_t length, const double *weights,
                                 double *out);
/* features is count x dim row-major; labels_out[i] is the cluster index of row i,
 * clusters numbered by their smallest row. */
FR_API fr_status fr_cluster_clients(const double *features, size_t count, size_t dim, int merge_steps,
                                    int *labels_out);
FR_API uint64_t fr_communication_cost(uint64_t rounds, uint64_t model_bytes, uint64_t participants_per_round);

#ifdef __cplusplus
}
#endif

#endif /* FEDREID_FEDREID_H_ */
