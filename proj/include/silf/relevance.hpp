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

#ifndef SILF_RELEVANCE_HPP_
#define SILF_RELEVANCE_HPP_

#include <span>
#include <vector>

#include "silf/maskstore.hpp"
#include "silf/neuralcore.hpp"

namespace silf {

// Spearman rank correlation: Pearson correlation of fractional ranks (ties
// share their average rank). Throws kUndefinedCorrelation for fewer than two
// samples or constant truth; constant predictions carry no ordering and
// yield 0.
double Srcc(std::span<const double> pred, std::span<const double> truth);

// Fractional 1-based ranks.
std::vector<double> FractionalRanks(std::span<const double> values);

// 1 + lambda * srcc when srcc < 0, else 1.
double ReuseRatio(double srcc, double lambda);

struct RelevanceRow {
  TaskId prev_task = 0;
  double srcc = 0.0;
  double reuse_ratio = 1.0;
  ViewMode eval_mode = ViewMode::kMax;
  std::size_t owned_count = 0;
  std::size_t muted_count = 0;
  std::vector<double> scores;
};

struct RelevanceReport {
  TaskId task = 0;
  std::vector<RelevanceRow> rows;
};

// Mutes, per layer, the floor((1 - reuse_ratio) * owned) smallest-|w|
// weights currently owned by `prev`. Values are never touched.
ReuseEntry MuteByMagnitude(const MaskRegistry &registry,
                           const NetworkParams &params, TaskId prev,
                           double reuse_ratio);

// What the relevance pass needs to replay an earlier task's model.
struct TaskModel {
  const BiasSet *biases = nullptr;
  const ReuseRecord *reuse = nullptr;
};

struct RelevanceResult {
  ReuseRecord record;
  RelevanceReport report;
};

// Scores the current training inputs with every earlier task's model, turns
// each SRCC into a reuse ratio and mutes the rest of that task's weights.
// All evaluations use the unmuted model; muting is decided afterwards.
// previous[i - 1] describes task i, for i < task.
RelevanceResult RelevanceGuidedReuse(const MaskRegistry &registry,
                                     const NetworkParams &params,
                                     std::span<const TaskModel> previous,
                                     const Batch &current, TaskId task,
                                     double lambda);

}  // namespace silf

#endif  // SILF_RELEVANCE_HPP_
