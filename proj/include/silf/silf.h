/**
 * Copyright 2026 The SILF Authors
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

#ifndef SILF_SILF_H_
#define SILF_SILF_H_

/* C interface to the SILF library. Every call returns a silf_status; on
 * failure silf_last_error() describes the problem (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SILF_BUILDING_LIBRARY)
#define SILF_API __declspec(dllexport)
#else
#define SILF_API __declspec(dllimport)
#endif
#else
#define SILF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum silf_status {
  SILF_OK = 0,
  SILF_ERR_SHAPE = 1,
  SILF_ERR_ARGUMENT = 2,
  SILF_ERR_CAPACITY = 3,
  SILF_ERR_SCALABILITY_EXCEEDED = 4,
  SILF_ERR_DOUBLE_RECLAIM = 5,
  SILF_ERR_STALE_MODEL = 6,
  SILF_ERR_STATE = 7,
  SILF_ERR_UNDEFINED_CORRELATION = 8,
  SILF_ERR_PARSE = 9,
  SILF_ERR_VALIDATION = 10,
  SILF_ERR_FORMAT = 11,
  SILF_ERR_IO = 12,
  SILF_ERR_INTERNAL = 13
} silf_status;

typedef enum silf_view_mode {
  SILF_VIEW_DEFAULT = -1, /* max, or min once the task was cannibalized */
  SILF_VIEW_MAX = 0,
  SILF_VIEW_MIN = 1
} silf_view_mode;

typedef enum silf_method {
  SILF_METHOD_SILF = 0,
  SILF_METHOD_SL = 1,
  SILF_METHOD_NO_RL = 2,
  SILF_METHOD_NO_RR = 3
} silf_method;

typedef enum silf_split {
  SILF_SPLIT_TEST = 0,
  SILF_SPLIT_TRAIN = 1,
  SILF_SPLIT_ALL = 2
} silf_split;

typedef struct silf_metrics {
  double average_accuracy;
  double average_forgetting;
  double average_plasticity;
  size_t tasks;
} silf_metrics;

typedef struct silf_checkpoint silf_checkpoint;

SILF_API const char *silf_version(void);
SILF_API const char *silf_status_name(silf_status status);
/* Message of the last failed call on this thread; "" after a success. */
SILF_API const char *silf_last_error(void);

/* Runs a sequence (or a baseline) and writes all artifacts to out_dir.
 * seed may be NULL to keep the configured seed. Either metrics pointer may
 * be NULL. */
SILF_API silf_status silf_run(const char *config_path, const char *out_dir,
                              silf_method method, const uint64_t *seed,
                              silf_metrics *full_run, silf_metrics *preset_stage);

SILF_API silf_status silf_eval(const char *checkpoint_path, int task,
                               silf_view_mode mode, const char *data_csv,
                               silf_split split, double *srcc);

/* Writes out_dir/report.md. */
SILF_API silf_status silf_report(const char *out_dir);

/* Canonical default configuration as JSON. Copies at most capacity bytes
 * including the terminator; *needed receives the full size. */
SILF_API silf_status silf_default_config(char *buffer, size_t capacity, size_t *needed);

/* Metrics of a score_matrix.csv document. */
SILF_API silf_status silf_metrics_from_csv(const char *csv_text, silf_metrics *out);

SILF_API silf_status silf_checkpoint_load(const char *path, silf_checkpoint **out);
SILF_API void silf_checkpoint_free(silf_checkpoint *ckpt);
SILF_API silf_status silf_checkpoint_task_count(const silf_checkpoint *ckpt, int *out);
SILF_API silf_status silf_checkpoint_input_dim(const silf_checkpoint *ckpt, size_t *out);
SILF_API silf_status silf_checkpoint_is_cannibalized(const silf_checkpoint *ckpt, int task,
                                                     int *out);
/* inputs: rows x input_dim, row-major. outputs: rows values. */
SILF_API silf_status silf_checkpoint_predict(const silf_checkpoint *ckpt, int task,
                                             silf_view_mode mode, const double *inputs,
                                             size_t rows, double *outputs);

#ifdef __cplusplus
}
#endif

#endif /* SILF_SILF_H_ */
