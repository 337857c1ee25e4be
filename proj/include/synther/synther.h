// Copyright 2026 The synther Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SYNTHER_SYNTHER_H_
#define SYNTHER_SYNTHER_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SYNTHER_API __declspec(dllexport)
#else
#define SYNTHER_API __attribute__((visibility("default")))
#endif

/* Every fallible call returns one of these; details via synther_last_error(). */
typedef enum synther_status {
  SYNTHER_OK = 0,
  SYNTHER_ERR_INVALID_INPUT = 1,
  SYNTHER_ERR_FORMAT = 2,
  SYNTHER_ERR_UNAVAILABLE_DATA = 3,
  SYNTHER_ERR_NUMERIC = 4,
  SYNTHER_ERR_INVALID_STATE = 5,
  SYNTHER_ERR_INVALID_DOMAIN = 6,
  SYNTHER_ERR_CONFIG = 7,
  SYNTHER_ERR_UNDEFINED_METRIC = 8,
  SYNTHER_ERR_IO = 9,
  SYNTHER_ERR_INTERNAL = 10
} synther_status;

typedef struct synther_config synther_config;
typedef struct synther_run_result synther_run_result;
typedef struct synther_dataset synther_dataset;
typedef struct synther_model synther_model;
typedef struct synther_agent synther_agent;

SYNTHER_API const char* synther_version(void);
/* Message of the last failed call on this thread ("" if none). */
SYNTHER_API const char* synther_last_error(void);
/* Stable kebab-case name, e.g. "invalid-input". */
SYNTHER_API const char* synther_status_name(int status);

/* Configuration. Strings returned through `value` stay valid until the next
 * call on the same handle. */
SYNTHER_API int synther_config_create(synther_config** out);
SYNTHER_API void synther_config_destroy(synther_config* config);
SYNTHER_API int synther_config_set(synther_config* config, const char* key,
                                   const char* value);
SYNTHER_API int synther_config_merge_file(synther_config* config,
                                          const char* path);
SYNTHER_API int synther_config_get(synther_config* config, const char* key,
                                   const char** value);
SYNTHER_API int synther_config_resolved(synther_config* config,
                                        const char** text);
SYNTHER_API size_t synther_config_key_count(void);
SYNTHER_API const char* synther_config_key_name(size_t index);
SYNTHER_API const char* synther_config_key_default(size_t index);
SYNTHER_API const char* synther_config_key_help(size_t index);

/* Pipelines. */
SYNTHER_API size_t synther_command_count(void);
SYNTHER_API const char* synther_command_name(size_t index);
SYNTHER_API int synther_run(const char* command, const synther_config* config,
                            synther_run_result** out);
SYNTHER_API const char* synther_run_result_dir(const synther_run_result* r);
SYNTHER_API const char* synther_run_result_summary(const synther_run_result* r);
SYNTHER_API size_t synther_run_result_output_count(const synther_run_result* r);
SYNTHER_API const char* synther_run_result_output(const synther_run_result* r,
                                                  size_t index);
SYNTHER_API void synther_run_result_destroy(synther_run_result* r);

/* Datasets: row-major float32 rows of (s, a, r, s', [d]). */
SYNTHER_API int synther_dataset_create(size_t state_dim, size_t action_dim,
                                       int has_terminal, const float* rows,
                                       size_t count, synther_dataset** out);
SYNTHER_API int synther_dataset_load(const char* path, synther_dataset** out);
SYNTHER_API int synther_dataset_import_csv(const char* path,
                                           synther_dataset** out);
SYNTHER_API int synther_dataset_save(const synther_dataset* d, const char* path);
SYNTHER_API int synther_dataset_export_csv(const synther_dataset* d,
                                           const char* path);
SYNTHER_API int synther_dataset_shape(const synther_dataset* d,
                                      size_t* state_dim, size_t* action_dim,
                                      int* has_terminal, size_t* count);
SYNTHER_API int synther_dataset_copy_rows(const synther_dataset* d,
                                          size_t first, size_t n, float* out);
SYNTHER_API void synther_dataset_destroy(synther_dataset* d);

/* Diffusion models. */
SYNTHER_API int synther_model_load(const char* path, synther_model** out);
SYNTHER_API size_t synther_model_parameter_count(const synther_model* m);
SYNTHER_API int synther_model_generate(const synther_model* m, size_t count,
                                       uint64_t seed, int clamp,
                                       synther_dataset** out);
SYNTHER_API void synther_model_destroy(synther_model* m);

/* Agents. */
SYNTHER_API int synther_agent_load(const char* path, synther_agent** out);
SYNTHER_API int synther_agent_act(const synther_agent* a, const float* obs,
                                  size_t obs_len, float* action,
                                  size_t action_len);
SYNTHER_API int synther_agent_evaluate(const synther_agent* a,
                                       const char* env, size_t episodes,
                                       uint64_t seed, double* mean,
                                       double* std);
SYNTHER_API void synther_agent_destroy(synther_agent* a);

/* Metrics. */
SYNTHER_API int synther_fidelity(const synther_dataset* real,
                                 const synther_dataset* synth, size_t max_rows,
                                 uint64_t seed, double* marginal,
                                 double* correlation);
SYNTHER_API int synther_compression_ratio(double dataset_floats,
                                          double parameter_count,
                                          double* ratio);

#ifdef __cplusplus
}
#endif

#endif  /* SYNTHER_SYNTHER_H_ */
