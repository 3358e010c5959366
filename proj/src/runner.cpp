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

#include "silf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>

#include "json.hpp"
#include "silf/checkpoint.hpp"
#include "silf/config.hpp"
#include "silf/error.hpp"
#include "silf/rng.hpp"
#include "silf/textio.hpp"

namespace silf {

namespace fs = std::filesystem;
using OrderedJson = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

const char *LevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kError: return "error";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "info";
}

OrderedJson SummaryJson(const MetricsSummary &m) {
  return {{"tasks", m.tasks},
          {"average_accuracy", m.average_accuracy},
          {"average_forgetting", m.average_forgetting},
          {"average_plasticity", m.average_plasticity}};
}

std::string RelevanceCsv(const std::vector<RelevanceReport> &reports) {
  std::string out = "task,prev_task,srcc,reuse_ratio,muted_count,owned_count,eval_mode\n";
  for (const RelevanceReport &r : reports) {
    for (const RelevanceRow &row : r.rows) {
      out += std::to_string(r.task) + "," + std::to_string(row.prev_task) + "," +
             FormatExact(row.srcc) + "," + FormatExact(row.reuse_ratio) + "," +
             std::to_string(row.muted_count) + "," + std::to_string(row.owned_count) + "," +
             ViewModeName(row.eval_mode) + "\n";
    }
  }
  return out;
}

// Wall-clock per phase, keyed "task_<t>/<phase>".
class PhaseTimer {
 public:
  void Enter(const std::string &key) {
    Close();
    current_ = key;
    start_ = Clock::now();
  }
  void Close() {
    if (current_.empty()) return;
    seconds_[current_] += std::chrono::duration<double>(Clock::now() - start_).count();
    current_.clear();
  }
  const std::map<std::string, double> &seconds() const { return seconds_; }

 private:
  std::string current_;
  Clock::time_point start_;
  std::map<std::string, double> seconds_;
};

OrderedJson ReadJsonFile(const std::string &path) {
  try {
    return OrderedJson::parse(ReadFile(path));
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorCode::kValidation, path + ": " + e.what());
  }
}

std::string MarkdownScoreMatrix(const ScoreMatrix &m) {
  std::string out = "| after task |";
  for (std::size_t i = 1; i <= m.tasks(); ++i) out += " task " + std::to_string(i) + " |";
  out += "\n|---|";
  for (std::size_t i = 1; i <= m.tasks(); ++i) out += "---|";
  out += "\n";
  for (std::size_t r = 1; r <= m.tasks(); ++r) {
    out += "| " + std::to_string(r) + " |";
    for (std::size_t i = 1; i <= m.tasks(); ++i) {
      out += i <= r ? " " + FormatScore(m.at(r, i)) + " |" : "  |";
    }
    out += "\n";
  }
  return out;
}

std::string Cell(const OrderedJson &summary, const char *key) {
  if (!summary.contains(key) || !summary.at(key).is_number()) return "n/a";
  return FormatScore(summary.at(key).get<double>());
}

}  // namespace

LogLevel LogLevelFromEnv() {
  const char *env = std::getenv("SILF_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string v = env;
  if (v == "error") return LogLevel::kError;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void Logger::Log(LogLevel level, const std::string &msg) {
  if (level > level_) return;
  text_ += std::string("[") + LevelName(level) + "] " + msg + "\n";
}

RunOutcome CmdRun(const RunOptions &options) {
  std::string text;
  try {
    text = ReadFile(options.config_path);
  } catch (const Error &e) {
    Fail(ErrorCode::kValidation, std::string("cannot read config: ") + e.what());
  }
  const RunConfig rc = ParseRunConfig(text, options.seed);
  const SequenceConfig &cfg = rc.sequence;
  const Baseline method = options.baseline.value_or(Baseline::kSilf);
  if (options.out_dir.empty()) Fail(ErrorCode::kValidation, "--out is required");

  fs::create_directories(fs::path(options.out_dir) / "tasks");
  const fs::path out(options.out_dir);
  Logger log(LogLevelFromEnv());
  PhaseTimer timer;
  RunOutcome outcome;
  outcome.method = method;
  auto write_artifact = [&](const std::string &name, const std::string &contents) {
    WriteFile((out / name).string(), contents);
    outcome.artifacts.push_back(name);
  };
  const std::string partial = (out / "partial.silf").string();

  try {
    for (const std::string &w : rc.warnings) log.Info("warning: " + w);
    log.Info(std::string("method ") + BaselineName(method) + ", seed " +
             std::to_string(cfg.seed) + ", n = " + std::to_string(cfg.preset_tasks) +
             ", k = " + std::to_string(cfg.additional_tasks) + ", trials " +
             std::to_string(rc.trials));
    const std::string resolved = CanonicalConfigJson(rc);
    write_artifact("config.resolved.json", resolved);

    timer.Enter("generate");
    const std::vector<Dataset> datasets = rc.suite.GenerateAll();
    OrderedJson task_manifest = OrderedJson::array();
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      const std::string name = "tasks/task_" + std::to_string(i + 1) + ".csv";
      write_artifact(name, DatasetToCsv(datasets[i]));
      const SyntheticTaskSpec &s = rc.suite.spec(i + 1);
      task_manifest.push_back({{"task", i + 1},
                               {"file", name},
                               {"generator", GeneratorName(s.generator)},
                               {"relevance_angle", s.relevance_angle},
                               {"reference", s.reference},
                               {"base", s.base},
                               {"rows", datasets[i].rows()},
                               {"train_rows", datasets[i].TrainCount()}});
    }
    write_artifact("tasks/manifest.json", task_manifest.dump(2) + "\n");
    timer.Close();

    std::vector<std::vector<Dataset>> per_task;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      per_task.push_back(RepeatSplits(datasets[i], rc.trials, rc.suite.spec(i + 1).train_fraction,
                                      DeriveSeed(cfg.seed, "split/" + std::to_string(i + 1))));
    }

    SequenceConfig run_cfg = cfg;
    if (method == Baseline::kNoRelevance) run_cfg.lambda = 0.0;
    std::vector<ScoreMatrix> matrices;
    for (std::size_t j = 0; j < rc.trials; ++j) {
      std::vector<Dataset> trial_data;
      for (const auto &splits : per_task) trial_data.push_back(splits[j]);
      const std::string prefix = rc.trials > 1 ? "trial_" + std::to_string(j + 1) + "/" : "";
      log.Info("trial " + std::to_string(j + 1) + " of " + std::to_string(rc.trials));

      if (method == Baseline::kSeparate || method == Baseline::kNoRemember) {
        timer.Enter(prefix + "baseline");
        matrices.push_back(RunBaseline(run_cfg, trial_data, method));
        timer.Close();
        continue;
      }
      PhaseHook hook = [&](const Checkpoint &ckpt, TaskId t, const std::string &phase) {
        const std::string key = prefix + "task_" + std::to_string(t) + "/" + phase;
        timer.Enter(key);
        log.Debug("enter " + key);
        SaveCheckpoint(ckpt, partial, resolved);
      };
      SequenceResult result = RunSequence(run_cfg, trial_data, hook);
      timer.Close();
      for (const TaskStats &s : result.stats) {
        log.Info("task " + std::to_string(s.task) + ": free " + std::to_string(s.free_before) +
                 " -> " + std::to_string(s.free_after) + ", reclaimed " +
                 std::to_string(s.reclaimed) + ", trainable " + std::to_string(s.trainable) +
                 ", score " + FormatScore(result.scores.at(result.scores.tasks(),
                                                           static_cast<std::size_t>(s.task))));
      }
      if (j == 0) {
        SaveCheckpoint(result.checkpoint, (out / "checkpoint.silf").string(), resolved);
        outcome.artifacts.push_back("checkpoint.silf");
        outcome.artifacts.push_back("checkpoint.silf.json");
        write_artifact("relevance.csv", RelevanceCsv(result.relevance));
      }
      matrices.push_back(std::move(result.scores));
    }
    fs::remove(partial);

    outcome.scores = MeanMatrix(matrices);
    outcome.full_run = Summarize(outcome.scores);
    const std::size_t preset =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.preset_tasks), outcome.scores.tasks());
    outcome.preset_stage = Summarize(outcome.scores.Leading(preset));
    write_artifact("score_matrix.csv", outcome.scores.ToCsv());

    OrderedJson metrics = {{"method", BaselineName(method)},
                           {"tasks", outcome.full_run.tasks},
                           {"preset_tasks", cfg.preset_tasks},
                           {"additional_tasks", cfg.additional_tasks},
                           {"trials", rc.trials},
                           {"average_accuracy", outcome.full_run.average_accuracy},
                           {"average_forgetting", outcome.full_run.average_forgetting},
                           {"average_plasticity", outcome.full_run.average_plasticity},
                           {"preset_stage", SummaryJson(outcome.preset_stage)},
                           {"full_run", SummaryJson(outcome.full_run)}};
    write_artifact("metrics.json", metrics.dump(2) + "\n");
    log.Info("A " + FormatScore(outcome.full_run.average_accuracy) + ", F " +
             FormatScore(outcome.full_run.average_forgetting) + ", P " +
             FormatScore(outcome.full_run.average_plasticity));
  } catch (const Error &e) {
    log.Error(e.what());
    WriteFile((out / "run.log").string(), log.text());
    throw;
  } catch (const std::exception &e) {
    log.Error(e.what());
    WriteFile((out / "run.log").string(), log.text());
    throw;
  }

  write_artifact("run.log", log.text());
  OrderedJson phases = OrderedJson::object();
  for (const auto &[key, seconds] : timer.seconds()) phases[key] = seconds;
  OrderedJson manifest = {{"config", options.config_path},
                          {"out_dir", options.out_dir},
                          {"method", BaselineName(method)},
                          {"artifacts", outcome.artifacts},
                          {"phase_seconds", phases}};
  WriteFile((out / "manifest.json").string(), manifest.dump(2) + "\n");
  outcome.artifacts.push_back("manifest.json");
  return outcome;
}

double CmdEval(const std::string &checkpoint_path, TaskId task, std::optional<ViewMode> mode,
               const std::string &data_csv, Split split) {
  const Checkpoint ckpt = LoadCheckpoint(checkpoint_path);
  if (task < 1 || task > ckpt.trained()) {
    Fail(ErrorCode::kArgument, "task " + std::to_string(task) + " not in checkpoint (1.." +
                                   std::to_string(ckpt.trained()) + ")");
  }
  const Dataset data = LoadCsv(data_csv);
  if (data.dim != ckpt.params.InputDim()) {
    Fail(ErrorCode::kShape, "dataset has " + std::to_string(data.dim) +
                                " features, network expects " +
                                std::to_string(ckpt.params.InputDim()));
  }
  const Samples samples = data.Subset(split);
  return EvaluateTask(ckpt, task, samples, mode);
}

std::string CmdReport(const std::string &out_dir) {
  const fs::path out(out_dir);
  const fs::path manifest_path = out / "manifest.json";
  if (!fs::exists(manifest_path)) {
    Fail(ErrorCode::kValidation, "missing artifact " + manifest_path.string());
  }
  const OrderedJson manifest = ReadJsonFile(manifest_path.string());
  if (!manifest.contains("artifacts") || !manifest.at("artifacts").is_array()) {
    Fail(ErrorCode::kValidation, "manifest.json lists no artifacts");
  }
  for (const auto &a : manifest.at("artifacts")) {
    if (!a.is_string() || !fs::exists(out / a.get<std::string>())) {
      Fail(ErrorCode::kValidation, "missing artifact " + (out / a.dump()).string());
    }
  }
  for (const char *need : {"score_matrix.csv", "metrics.json"}) {
    if (!fs::exists(out / need)) {
      Fail(ErrorCode::kValidation, "missing artifact " + (out / need).string());
    }
  }

  ScoreMatrix scores;
  try {
    scores = ScoreMatrix::FromCsv(ReadFile((out / "score_matrix.csv").string()));
  } catch (const Error &e) {
    Fail(ErrorCode::kValidation, std::string("score_matrix.csv: ") + e.what());
  }
  const OrderedJson metrics = ReadJsonFile((out / "metrics.json").string());
  const std::string method = metrics.value("method", std::string("SILF"));

  std::string md = "# Run report\n\nMethod: " + method + ", tasks: " +
                   std::to_string(scores.tasks()) + "\n\n";
  md += "## Score matrix (SRCC on test split)\n\n" + MarkdownScoreMatrix(scores) + "\n";

  const fs::path rel = out / "relevance.csv";
  if (fs::exists(rel)) {
    md += "## Relevance and reuse\n\n"
          "| task | previous task | SRCC | reuse ratio | muted | owned | view |\n"
          "|---|---|---|---|---|---|---|\n";
    const std::vector<std::string> lines = SplitLines(ReadFile(rel.string()));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const std::vector<std::string> f = SplitCsv(lines[i]);
      if (f.size() != 7) {
        Fail(ErrorCode::kValidation, "relevance.csv line " + std::to_string(i + 1) +
                                         ": expected 7 fields");
      }
      md += "| " + f[0] + " | " + f[1] + " | " +
            FormatScore(ParseDouble(f[2], "relevance.csv")) + " | " +
            FormatScore(ParseDouble(f[3], "relevance.csv")) + " | " + f[4] + " | " + f[5] +
            " | " + f[6] + " |\n";
    }
    md += "\n";
  }

  md += "## Metrics\n\n| metric | preset stage | full run |\n|---|---|---|\n";
  const OrderedJson preset = metrics.value("preset_stage", OrderedJson::object());
  const OrderedJson full = metrics.value("full_run", OrderedJson::object());
  for (const auto &[key, label] : std::vector<std::pair<const char *, const char *>>{
           {"average_accuracy", "average accuracy (A)"},
           {"average_forgetting", "average forgetting (F)"},
           {"average_plasticity", "average plasticity (P)"}}) {
    md += std::string("| ") + label + " | " + Cell(preset, key) + " | " + Cell(full, key) +
          " |\n";
  }
  md += "\n";

  const fs::path baselines = out / "baselines";
  if (fs::is_directory(baselines)) {
    std::vector<fs::path> dirs;
    for (const auto &entry : fs::directory_iterator(baselines)) {
      if (entry.is_directory() && fs::exists(entry.path() / "metrics.json")) {
        dirs.push_back(entry.path());
      }
    }
    std::sort(dirs.begin(), dirs.end());
    if (!dirs.empty()) {
      md += "## Baseline comparison\n\n| method | A | F | P |\n|---|---|---|---|\n";
      md += "| " + method + " | " + Cell(full, "average_accuracy") + " | " +
            Cell(full, "average_forgetting") + " | " + Cell(full, "average_plasticity") +
            " |\n";
      for (const fs::path &d : dirs) {
        const OrderedJson m = ReadJsonFile((d / "metrics.json").string());
        md += "| " + m.value("method", d.filename().string()) + " | " +
              Cell(m, "average_accuracy") + " | " + Cell(m, "average_forgetting") + " | " +
              Cell(m, "average_plasticity") + " |\n";
      }
      md += "\n";
    }
  }

  const std::string path = (out / "report.md").string();
  WriteFile(path, md);
  return path;
}

}  // namespace silf
