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

#include "doctest.h"
#include "oracles.hpp"
#include "silf/engine.hpp"

using namespace silf;

namespace {

SequenceConfig Small(int n, int k) {
  SequenceConfig c;
  c.net = DefaultNetSpec(8);
  c.preset_tasks = n;
  c.additional_tasks = k;
  c.first_ratios.assign(static_cast<std::size_t>(n), 0.5);
  c.first_ratios.back() = 0.0;
  c.second_ratios.assign(static_cast<std::size_t>(n), 0.4);
  c.epochs_initial = 4;
  c.epochs_cycle = 2;
  c.cycles = 1;
  c.epochs_additional = 4;
  c.optimizer.base_lr = 0.05;
  c.seed = 17;
  c.probe_count = 16;
  return c;
}

std::vector<Dataset> Data(std::size_t tasks) {
  std::vector<SyntheticTaskSpec> specs = TaskSuite::Default(3, tasks).specs();
  for (auto &s : specs) s.sample_count = 300;
  return TaskSuite(specs).GenerateAll();
}

}  // namespace

TEST_CASE("config validation names the violated constraint") {
  SequenceConfig c = Small(2, 1);
  c.Validate();
  c.additional_tasks = 3;
  try {
    c.Validate();
    FAIL("expected validation error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kValidation);
    CHECK(std::string(e.what()).find("k <= n") != std::string::npos);
  }
  c = Small(2, 1);
  c.first_ratios = {0.5};
  CHECK(oracle::CodeOf([&] { c.Validate(); }) == ErrorCode::kValidation);
  c = Small(2, 1);
  c.second_ratios[0] = 1.2;
  CHECK(oracle::CodeOf([&] { c.Validate(); }) == ErrorCode::kValidation);
  c = Small(2, 1);
  c.lambda = -0.1;
  CHECK(oracle::CodeOf([&] { c.Validate(); }) == ErrorCode::kValidation);
  c = Small(2, 0);
  c.first_ratios = {0.5, 0.3};
  CHECK(!c.Validate().empty());
}

TEST_CASE("epoch budget") {
  const SequenceConfig c = Small(2, 1);
  CHECK(TaskEpochBudget(c, 1) == 4 + 2 * 1 * 2);
  CHECK(TaskEpochBudget(c, 3) == 4);
}

TEST_CASE("preset tasks never change once learned") {
  const SequenceConfig c = Small(3, 0);
  const SequenceResult r = RunSequence(c, Data(3));
  REQUIRE(r.history.size() == 3);
  for (std::size_t j = 1; j <= 3; ++j) {
    const auto &at_completion = r.history[j - 1].eval[j - 1];
    CHECK(r.history.back().eval[j - 1] == at_completion);
    CHECK(r.checkpoint.task(static_cast<TaskId>(j)).probe.eval_predictions == at_completion);
    for (std::size_t m = j; m <= 3; ++m) CHECK(r.scores.at(m, j) == r.scores.at(j, j));
  }
  CHECK(Summarize(r.scores).average_forgetting == 0.0);
  CHECK(r.checkpoint.registry.CheckInvariants().empty());
}

TEST_CASE("reclamation keeps minimum models and storage fixed") {
  const SequenceConfig c = Small(2, 2);
  const SequenceResult r = RunSequence(c, Data(4));
  CHECK(r.stats[1].free_after == 0);
  for (int t = 3; t <= 4; ++t) {
    const TaskStats &s = r.stats[static_cast<std::size_t>(t - 1)];
    CHECK(s.reclaimed > 0);
    CHECK(s.trainable == s.reclaimed);
    CHECK(s.weight_count == r.stats[0].weight_count);
    CHECK(s.mask_bytes == r.stats[0].mask_bytes);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(r.history[1].min[j] == r.history[3].min[j]);
    CHECK(r.checkpoint.registry.IsCannibalized(static_cast<TaskId>(j + 1)));
    CHECK(DefaultMode(r.checkpoint, static_cast<TaskId>(j + 1)) == ViewMode::kMin);
  }
  CHECK(oracle::CodeOf([&] { TaskView(r.checkpoint, 1, ViewMode::kMax); }) ==
        ErrorCode::kStaleModel);
}

TEST_CASE("runs are deterministic and phases are hooked in order") {
  const SequenceConfig c = Small(2, 1);
  const auto data = Data(3);
  std::vector<std::string> phases;
  const SequenceResult a = RunSequence(c, data, [&](const Checkpoint &, TaskId t,
                                                    const std::string &phase) {
    phases.push_back(std::to_string(t) + ":" + phase);
  });
  const SequenceResult b = RunSequence(c, data);
  CHECK(a.scores == b.scores);
  CHECK(a.checkpoint.params == b.checkpoint.params);
  CHECK(a.checkpoint.tasks == b.checkpoint.tasks);
  CHECK(a.checkpoint.registry.state() == b.checkpoint.registry.state());
  const std::vector<std::string> expect{"1:initial",   "1:cyclic-finetune", "2:relevance",
                                        "2:initial",   "2:cyclic-finetune", "3:relevance",
                                        "3:finetune"};
  CHECK(phases == expect);
}

TEST_CASE("cyclic fine-tuning moves only the task's own weights") {
  SequenceConfig c = Small(2, 0);
  const auto data = Data(2);
  Learner learner(c);
  learner.LearnTask(data[0], "a");
  Checkpoint ck = learner.checkpoint();
  const NetworkParams before = ck.params;
  OptimizerState opt = c.optimizer;
  CHECK(oracle::CodeOf([&] {
          CyclicFinetune(ck.params, ck.registry, 1, ck.task(1).reuse,
                         data[0].Subset(Split::kTrain), c, opt, 1);
        }) == ErrorCode::kState);
  CHECK(ck.params == before);
}

TEST_CASE("errors carry task and phase context") {
  SequenceConfig c = Small(2, 0);
  // the 16-weight head keeps nothing at this ratio
  c.first_ratios = {0.97, 0.0};
  Learner learner(c);
  const auto data = Data(2);
  try {
    learner.LearnTask(data[0], "a");
    FAIL("expected capacity error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kCapacity);
    CHECK(std::string(e.what()).find("task 1, phase first-prune") != std::string::npos);
  }
  Learner other(Small(1, 0));
  SyntheticTaskSpec s;
  s.input_dim = 3;
  const Dataset narrow = TaskSuite({s}).Generate(1);
  CHECK(oracle::CodeOf([&] { other.LearnTask(narrow, "x"); }) == ErrorCode::kShape);
}

TEST_CASE("baselines") {
  const SequenceConfig c = Small(2, 0);
  std::vector<SyntheticTaskSpec> specs(2);
  specs[0].sample_count = specs[1].sample_count = 300;
  specs[0].seed = 1;
  specs[1].generator = Generator::kAnti;
  specs[1].base = 1;
  specs[1].seed = 2;
  const auto data = TaskSuite(specs).GenerateAll();
  const ScoreMatrix sl = RunBaseline(c, data, Baseline::kSeparate);
  CHECK(sl.at(2, 1) == sl.at(1, 1));
  const ScoreMatrix norl = RunBaseline(c, data, Baseline::kNoRemember);
  CHECK(norl.at(2, 1) < norl.at(1, 1));
  SequenceConfig zero = c;
  zero.lambda = 0.0;
  CHECK(RunBaseline(c, data, Baseline::kNoRelevance) == RunSequence(zero, data).scores);
  CHECK(ParseBaseline("NO-RR") == Baseline::kNoRelevance);
  CHECK(oracle::CodeOf([] { ParseBaseline("EWC"); }) == ErrorCode::kValidation);
}
