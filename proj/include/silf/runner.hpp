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

#ifndef SILF_RUNNER_HPP_
#define SILF_RUNNER_HPP_

// Command drivers behind the CLI: run a sequence into an output directory,
// evaluate a checkpoint on a CSV, render a markdown report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "silf/engine.hpp"
#include "silf/metrics.hpp"

namespace silf {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// SILF_LOG=error|info|debug, default info. Unknown values fall back to info.
LogLevel LogLevelFromEnv();

class Logger {
 public:
  explicit Logger(LogLevel level) : level_(level) {}

  void Log(LogLevel level, const std::string &msg);
  void Error(const std::string &msg) { Log(LogLevel::kError, msg); }
  void Info(const std::string &msg) { Log(LogLevel::kInfo, msg); }
  void Debug(const std::string &msg) { Log(LogLevel::kDebug, msg); }

  const std::string &text() const { return text_; }

 private:
  LogLevel level_;
  std::string text_;
};

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<Baseline> baseline;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  Baseline method = Baseline::kSilf;
  ScoreMatrix scores;
  MetricsSummary full_run;
  MetricsSummary preset_stage;
  std::vector<std::string> artifacts;  // relative to out_dir
};

// Validation problems raise kValidation before anything is written. Runtime
// failures leave run.log (with the failing phase) and partial.silf behind.
RunOutcome CmdRun(const RunOptions &options);

// SRCC of `task` on the chosen split of a dataset CSV.
double CmdEval(const std::string &checkpoint_path, TaskId task,
               std::optional<ViewMode> mode, const std::string &data_csv,
               Split split = Split::kTest);

// Writes <out_dir>/report.md and returns its path. Missing run artifacts
// raise kValidation.
std::string CmdReport(const std::string &out_dir);

}  // namespace silf

#endif  // SILF_RUNNER_HPP_
