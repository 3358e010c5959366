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

#include "silf/silf.h"

#include <cstring>
#include <new>
#include <string>

#include "silf/checkpoint.hpp"
#include "silf/config.hpp"
#include "silf/error.hpp"
#include "silf/runner.hpp"

struct silf_checkpoint {
  silf::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

silf_status FromCode(silf::ErrorCode code) {
  using silf::ErrorCode;
  switch (code) {
    case ErrorCode::kShape: return SILF_ERR_SHAPE;
    case ErrorCode::kArgument: return SILF_ERR_ARGUMENT;
    case ErrorCode::kCapacity: return SILF_ERR_CAPACITY;
    case ErrorCode::kScalabilityExceeded: return SILF_ERR_SCALABILITY_EXCEEDED;
    case ErrorCode::kDoubleReclaim: return SILF_ERR_DOUBLE_RECLAIM;
    case ErrorCode::kStaleModel: return SILF_ERR_STALE_MODEL;
    case ErrorCode::kState: return SILF_ERR_STATE;
    case ErrorCode::kUndefinedCorrelation: return SILF_ERR_UNDEFINED_CORRELATION;
    case ErrorCode::kParse: return SILF_ERR_PARSE;
    case ErrorCode::kValidation: return SILF_ERR_VALIDATION;
    case ErrorCode::kFormat: return SILF_ERR_FORMAT;
    case ErrorCode::kIo: return SILF_ERR_IO;
  }
  return SILF_ERR_INTERNAL;
}

template <typename Fn>
silf_status Guard(Fn &&fn) {
  try {
    fn();
    g_last_error.clear();
    return SILF_OK;
  } catch (const silf::Error &e) {
    g_last_error = e.what();
    return FromCode(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
  } catch (const std::exception &e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return SILF_ERR_INTERNAL;
}

void Require(const void *p, const char *what) {
  if (p == nullptr) silf::Fail(silf::ErrorCode::kArgument, std::string(what) + " is null");
}

std::optional<silf::ViewMode> ToMode(silf_view_mode mode) {
  switch (mode) {
    case SILF_VIEW_DEFAULT: return std::nullopt;
    case SILF_VIEW_MAX: return silf::ViewMode::kMax;
    case SILF_VIEW_MIN: return silf::ViewMode::kMin;
  }
  silf::Fail(silf::ErrorCode::kArgument, "unknown view mode");
}

void Fill(silf_metrics *out, const silf::MetricsSummary &m) {
  if (out == nullptr) return;
  out->average_accuracy = m.average_accuracy;
  out->average_forgetting = m.average_forgetting;
  out->average_plasticity = m.average_plasticity;
  out->tasks = m.tasks;
}

}  // namespace

extern "C" {

const char *silf_version(void) { return "1.0.0"; }

const char *silf_status_name(silf_status status) {
  switch (status) {
    case SILF_OK: return "ok";
    case SILF_ERR_SHAPE: return silf::ErrorCodeName(silf::ErrorCode::kShape);
    case SILF_ERR_ARGUMENT: return silf::ErrorCodeName(silf::ErrorCode::kArgument);
    case SILF_ERR_CAPACITY: return silf::ErrorCodeName(silf::ErrorCode::kCapacity);
    case SILF_ERR_SCALABILITY_EXCEEDED:
      return silf::ErrorCodeName(silf::ErrorCode::kScalabilityExceeded);
    case SILF_ERR_DOUBLE_RECLAIM: return silf::ErrorCodeName(silf::ErrorCode::kDoubleReclaim);
    case SILF_ERR_STALE_MODEL: return silf::ErrorCodeName(silf::ErrorCode::kStaleModel);
    case SILF_ERR_STATE: return silf::ErrorCodeName(silf::ErrorCode::kState);
    case SILF_ERR_UNDEFINED_CORRELATION:
      return silf::ErrorCodeName(silf::ErrorCode::kUndefinedCorrelation);
    case SILF_ERR_PARSE: return silf::ErrorCodeName(silf::ErrorCode::kParse);
    case SILF_ERR_VALIDATION: return silf::ErrorCodeName(silf::ErrorCode::kValidation);
    case SILF_ERR_FORMAT: return silf::ErrorCodeName(silf::ErrorCode::kFormat);
    case SILF_ERR_IO: return silf::ErrorCodeName(silf::ErrorCode::kIo);
    case SILF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *silf_last_error(void) { return g_last_error.c_str(); }

silf_status silf_run(const char *config_path, const char *out_dir, silf_method method,
                     const uint64_t *seed, silf_metrics *full_run, silf_metrics *preset_stage) {
  return Guard([&] {
    Require(config_path, "config_path");
    Require(out_dir, "out_dir");
    silf::RunOptions options;
    options.config_path = config_path;
    options.out_dir = out_dir;
    switch (method) {
      case SILF_METHOD_SILF: break;
      case SILF_METHOD_SL: options.baseline = silf::Baseline::kSeparate; break;
      case SILF_METHOD_NO_RL: options.baseline = silf::Baseline::kNoRemember; break;
      case SILF_METHOD_NO_RR: options.baseline = silf::Baseline::kNoRelevance; break;
      default: silf::Fail(silf::ErrorCode::kValidation, "unknown method");
    }
    if (seed != nullptr) options.seed = *seed;
    const silf::RunOutcome outcome = silf::CmdRun(options);
    Fill(full_run, outcome.full_run);
    Fill(preset_stage, outcome.preset_stage);
  });
}

silf_status silf_eval(const char *checkpoint_path, int task, silf_view_mode mode,
                      const char *data_csv, silf_split split, double *srcc) {
  return Guard([&] {
    Require(checkpoint_path, "checkpoint_path");
    Require(data_csv, "data_csv");
    Require(srcc, "srcc");
    silf::Split s = silf::Split::kTest;
    switch (split) {
      case SILF_SPLIT_TEST: s = silf::Split::kTest; break;
      case SILF_SPLIT_TRAIN: s = silf::Split::kTrain; break;
      case SILF_SPLIT_ALL: s = silf::Split::kAll; break;
      default: silf::Fail(silf::ErrorCode::kArgument, "unknown split");
    }
    *srcc = silf::CmdEval(checkpoint_path, task, ToMode(mode), data_csv, s);
  });
}

silf_status silf_report(const char *out_dir) {
  return Guard([&] {
    Require(out_dir, "out_dir");
    silf::CmdReport(out_dir);
  });
}

silf_status silf_default_config(char *buffer, size_t capacity, size_t *needed) {
  return Guard([&] {
    const std::string text = silf::DefaultConfigJson();
    if (needed != nullptr) *needed = text.size() + 1;
    if (buffer == nullptr || capacity == 0) return;
    const size_t n = std::min(capacity - 1, text.size());
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  });
}

silf_status silf_metrics_from_csv(const char *csv_text, silf_metrics *out) {
  return Guard([&] {
    Require(csv_text, "csv_text");
    Require(out, "out");
    Fill(out, silf::Summarize(silf::ScoreMatrix::FromCsv(csv_text)));
  });
}

silf_status silf_checkpoint_load(const char *path, silf_checkpoint **out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    auto *handle = new silf_checkpoint{silf::LoadCheckpoint(path)};
    *out = handle;
  });
}

void silf_checkpoint_free(silf_checkpoint *ckpt) { delete ckpt; }

silf_status silf_checkpoint_task_count(const silf_checkpoint *ckpt, int *out) {
  return Guard([&] {
    Require(ckpt, "checkpoint");
    Require(out, "out");
    *out = ckpt->ckpt.trained();
  });
}

silf_status silf_checkpoint_input_dim(const silf_checkpoint *ckpt, size_t *out) {
  return Guard([&] {
    Require(ckpt, "checkpoint");
    Require(out, "out");
    *out = ckpt->ckpt.params.InputDim();
  });
}

silf_status silf_checkpoint_is_cannibalized(const silf_checkpoint *ckpt, int task, int *out) {
  return Guard([&] {
    Require(ckpt, "checkpoint");
    Require(out, "out");
    if (task < 1 || task > ckpt->ckpt.trained()) {
      silf::Fail(silf::ErrorCode::kArgument, "task " + std::to_string(task) + " not trained");
    }
    *out = ckpt->ckpt.registry.IsCannibalized(task) ? 1 : 0;
  });
}

silf_status silf_checkpoint_predict(const silf_checkpoint *ckpt, int task, silf_view_mode mode,
                                    const double *inputs, size_t rows, double *outputs) {
  return Guard([&] {
    Require(ckpt, "checkpoint");
    if (rows == 0) return;
    Require(inputs, "inputs");
    Require(outputs, "outputs");
    if (task < 1 || task > ckpt->ckpt.trained()) {
      silf::Fail(silf::ErrorCode::kArgument, "task " + std::to_string(task) + " not trained");
    }
    const size_t dim = ckpt->ckpt.params.InputDim();
    const std::vector<double> pred =
        silf::PredictTask(ckpt->ckpt, task, std::span<const double>(inputs, rows * dim),
                          ToMode(mode));
    std::copy(pred.begin(), pred.end(), outputs);
  });
}

}  // extern "C"
