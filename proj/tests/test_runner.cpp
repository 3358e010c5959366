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

#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "silf/runner.hpp"
#include "silf/textio.hpp"

using namespace silf;
namespace fs = std::filesystem;

namespace {

const std::string kSmall = std::string(SILF_TEST_DATA) + "/small.json";

fs::path Fresh(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("silf_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("run writes the full artifact set and eval agrees with it") {
  const fs::path out = Fresh("full");
  const RunOutcome r = CmdRun(RunOptions{kSmall, out.string(), std::nullopt, std::nullopt});
  for (const char *name : {"checkpoint.silf", "checkpoint.silf.json", "score_matrix.csv",
                           "metrics.json", "relevance.csv", "run.log", "manifest.json",
                           "config.resolved.json", "tasks/task_1.csv", "tasks/manifest.json"}) {
    CHECK_MESSAGE(fs::exists(out / name), name);
  }
  CHECK(!fs::exists(out / "partial.silf"));
  const auto manifest = nlohmann::json::parse(ReadFile((out / "manifest.json").string()));
  for (const auto &a : manifest["artifacts"]) CHECK(fs::exists(out / a.get<std::string>()));
  CHECK(manifest["phase_seconds"].size() > 0);

  CHECK(r.preset_stage.average_forgetting == 0.0);
  const ScoreMatrix m = ScoreMatrix::FromCsv(ReadFile((out / "score_matrix.csv").string()));
  CHECK(m == r.scores);
  const std::string ckpt = (out / "checkpoint.silf").string();
  for (TaskId t = 1; t <= 3; ++t) {
    const std::string csv = (out / ("tasks/task_" + std::to_string(t) + ".csv")).string();
    CHECK(CmdEval(ckpt, t, std::nullopt, csv) == m.at(3, static_cast<std::size_t>(t)));
  }
  const std::string csv1 = (out / "tasks/task_1.csv").string();
  CHECK(oracle::CodeOf([&] { CmdEval(ckpt, 1, ViewMode::kMax, csv1); }) ==
        ErrorCode::kStaleModel);
  CHECK(oracle::CodeOf([&] { CmdEval(ckpt, 9, std::nullopt, csv1); }) == ErrorCode::kArgument);
  const double min2 = CmdEval(ckpt, 2, ViewMode::kMin,
                              (out / "tasks/task_2.csv").string());
  CHECK(min2 <= m.at(3, 2) + 0.05);

  const std::string report = ReadFile(CmdReport(out.string()));
  CHECK(report.find("| average forgetting (F) | 0.000000 |") != std::string::npos);
  CHECK(report.find("## Relevance and reuse") != std::string::npos);
}

TEST_CASE("same seed gives byte-identical outputs; NO-RR equals lambda 0") {
  const fs::path a = Fresh("a"), b = Fresh("b"), c = Fresh("c");
  CmdRun(RunOptions{kSmall, a.string(), std::nullopt, std::nullopt});
  CmdRun(RunOptions{kSmall, b.string(), std::nullopt, std::nullopt});
  CHECK(ReadFile((a / "score_matrix.csv").string()) == ReadFile((b / "score_matrix.csv").string()));
  CHECK(ReadFile((a / "checkpoint.silf").string()) == ReadFile((b / "checkpoint.silf").string()));

  auto cfg = nlohmann::json::parse(ReadFile(kSmall));
  cfg["sequence"]["lambda"] = 0.0;
  const fs::path zero_cfg = Fresh("zero.json");
  WriteFile(zero_cfg.string(), cfg.dump());
  const fs::path z = Fresh("z");
  CmdRun(RunOptions{zero_cfg.string(), z.string(), std::nullopt, std::nullopt});
  CmdRun(RunOptions{kSmall, c.string(), Baseline::kNoRelevance, std::nullopt});
  CHECK(ReadFile((z / "score_matrix.csv").string()) == ReadFile((c / "score_matrix.csv").string()));
}

TEST_CASE("baselines, trials and the comparison table") {
  const fs::path out = Fresh("cmp");
  CmdRun(RunOptions{kSmall, out.string(), std::nullopt, std::nullopt});
  const RunOutcome sl = CmdRun(RunOptions{kSmall, (out / "baselines/SL").string(),
                                          Baseline::kSeparate, std::nullopt});
  CHECK(!fs::exists(out / "baselines/SL/checkpoint.silf"));
  CHECK(sl.full_run.average_forgetting == 0.0);
  const std::string report = ReadFile(CmdReport(out.string()));
  CHECK(report.find("## Baseline comparison") != std::string::npos);
  CHECK(report.find("| SL |") != std::string::npos);

  auto cfg = nlohmann::json::parse(ReadFile(kSmall));
  cfg["sequence"]["trials"] = 2;
  const fs::path two = Fresh("two.json");
  WriteFile(two.string(), cfg.dump());
  const RunOutcome t = CmdRun(RunOptions{two.string(), Fresh("trials").string(),
                                         Baseline::kNoRemember, 3});
  CHECK(t.scores.tasks() == 3);
}

TEST_CASE("validation failures and missing artifacts") {
  const fs::path out = Fresh("bad");
  CHECK(oracle::CodeOf([&] {
          CmdRun(RunOptions{std::string(SILF_TEST_DATA) + "/k_gt_n.json", out.string(),
                            std::nullopt, std::nullopt});
        }) == ErrorCode::kValidation);
  CHECK(!fs::exists(out));
  CHECK(oracle::CodeOf([&] {
          CmdRun(RunOptions{"/nonexistent.json", out.string(), std::nullopt, std::nullopt});
        }) == ErrorCode::kValidation);
  fs::create_directories(out);
  CHECK(oracle::CodeOf([&] { CmdReport(out.string()); }) == ErrorCode::kValidation);
}
