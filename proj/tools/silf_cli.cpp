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

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "silf/silf.h"

namespace {

int Report(silf_status status) {
  std::cerr << "SILF-ERR: " << silf_status_name(status) << ": " << silf_last_error() << "\n";
  return 0;
}

int RunExit(silf_status status) {
  if (status == SILF_OK) return 0;
  Report(status);
  return status == SILF_ERR_VALIDATION || status == SILF_ERR_PARSE ? 2 : 1;
}

int EvalExit(silf_status status) {
  if (status == SILF_OK) return 0;
  Report(status);
  return status == SILF_ERR_STALE_MODEL ? 3 : 1;
}

int ReportExit(silf_status status) {
  if (status == SILF_OK) return 0;
  Report(status);
  return status == SILF_ERR_VALIDATION ? 2 : 1;
}

void PrintMetrics(const char *label, const silf_metrics &m) {
  std::printf("%s: tasks %zu  A %.6f  F %.6f  P %.6f\n", label, m.tasks, m.average_accuracy,
              m.average_forgetting, m.average_plasticity);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Scalable task-incremental learner with relevance-guided weight reuse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", silf_version());

  std::string config_path, out_dir, baseline;
  std::uint64_t seed = 0;
  CLI::App *run = app.add_subcommand("run", "Learn a task sequence and write artifacts");
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--baseline", baseline, "Comparison method")
      ->check(CLI::IsMember({"SL", "NO-RL", "NO-RR", "SILF"}));
  CLI::Option *seed_opt = run->add_option("--seed", seed, "Root seed override");

  std::string checkpoint, data, mode, split = "test";
  int task = 0;
  CLI::App *eval = app.add_subcommand("eval", "SRCC of one task of a checkpoint on a CSV");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--task", task, "1-based task id")->required();
  eval->add_option("--mode", mode, "Inference view")->check(CLI::IsMember({"max", "min"}));
  eval->add_option("--data", data, "Dataset CSV (x_1..x_d,y,split)")->required();
  eval->add_option("--split", split, "Rows to score")
      ->check(CLI::IsMember({"test", "train", "all"}));

  std::string report_dir;
  CLI::App *report = app.add_subcommand("report", "Render report.md from run artifacts");
  report->add_option("--out", report_dir, "Run output directory")->required();

  CLI::App *config = app.add_subcommand("default-config", "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "SILF-ERR: usage: " << e.what() << "\n";
    return 2;
  }

  if (run->parsed()) {
    silf_method method = SILF_METHOD_SILF;
    if (baseline == "SL") method = SILF_METHOD_SL;
    if (baseline == "NO-RL") method = SILF_METHOD_NO_RL;
    if (baseline == "NO-RR") method = SILF_METHOD_NO_RR;
    silf_metrics full{}, preset{};
    const silf_status st = silf_run(config_path.c_str(), out_dir.c_str(), method,
                                    seed_opt->count() ? &seed : nullptr, &full, &preset);
    if (st != SILF_OK) return RunExit(st);
    PrintMetrics("preset stage", preset);
    PrintMetrics("full run", full);
    return 0;
  }
  if (eval->parsed()) {
    silf_view_mode view = SILF_VIEW_DEFAULT;
    if (mode == "max") view = SILF_VIEW_MAX;
    if (mode == "min") view = SILF_VIEW_MIN;
    silf_split s = SILF_SPLIT_TEST;
    if (split == "train") s = SILF_SPLIT_TRAIN;
    if (split == "all") s = SILF_SPLIT_ALL;
    double srcc = 0.0;
    const silf_status st = silf_eval(checkpoint.c_str(), task, view, data.c_str(), s, &srcc);
    if (st != SILF_OK) return EvalExit(st);
    std::printf("%.6f\n", srcc);
    return 0;
  }
  if (report->parsed()) {
    const silf_status st = silf_report(report_dir.c_str());
    if (st != SILF_OK) return ReportExit(st);
    std::printf("%s/report.md\n", report_dir.c_str());
    return 0;
  }
  if (config->parsed()) {
    size_t needed = 0;
    silf_status st = silf_default_config(nullptr, 0, &needed);
    if (st != SILF_OK) return RunExit(st);
    std::string text(needed, '\0');
    st = silf_default_config(text.data(), text.size(), &needed);
    if (st != SILF_OK) return RunExit(st);
    std::fputs(text.c_str(), stdout);
    return 0;
  }
  return 0;
}
