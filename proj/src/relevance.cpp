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

#include "silf/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "silf/error.hpp"

namespace silf {

std::vector<double> FractionalRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 (0-based) share rank mean of i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double Srcc(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    Fail(ErrorCode::kUndefinedCorrelation, "prediction and truth lengths differ");
  }
  if (truth.size() < 2) {
    Fail(ErrorCode::kUndefinedCorrelation, "need at least two samples");
  }
  for (double v : pred) {
    if (!std::isfinite(v)) Fail(ErrorCode::kUndefinedCorrelation, "non-finite prediction");
  }
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  if (*lo == *hi) Fail(ErrorCode::kUndefinedCorrelation, "constant ground truth");

  const std::vector<double> rp = FractionalRanks(pred);
  const std::vector<double> rt = FractionalRanks(truth);
  const double n = static_cast<double>(rp.size());
  const double mp = std::accumulate(rp.begin(), rp.end(), 0.0) / n;
  const double mt = std::accumulate(rt.begin(), rt.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const double dx = rp[i] - mp;
    const double dy = rt[i] - mt;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0) return 0.0;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double ReuseRatio(double srcc, double lambda) {
  if (!(srcc >= -1.0 && srcc <= 1.0)) {
    Fail(ErrorCode::kArgument, "srcc outside [-1, 1]");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    Fail(ErrorCode::kArgument, "lambda outside [0, 1]");
  }
  return srcc < 0.0 ? 1.0 + lambda * srcc : 1.0;
}

ReuseEntry MuteByMagnitude(const MaskRegistry &registry,
                           const NetworkParams &params, TaskId prev,
                           double reuse_ratio) {
  if (!(reuse_ratio >= 0.0 && reuse_ratio <= 1.0)) {
    Fail(ErrorCode::kArgument, "reuse ratio outside [0, 1]");
  }
  ReuseEntry entry;
  entry.prev_task = prev;
  entry.reuse_ratio = reuse_ratio;
  entry.muted = EmptyBitmap(registry.spec());
  const Bitmap owned = registry.OwnedBy(prev);
  for (std::size_t l = 0; l < owned.size(); ++l) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < owned[l].size(); ++i) {
      if (owned[l][i]) candidates.push_back(i);
    }
    const std::size_t take = FloorCount(1.0 - reuse_ratio, candidates.size());
    for (std::size_t i :
         SmallestByMagnitude(params.layers[l].weights, candidates, take)) {
      entry.muted[l][i] = 1;
    }
    entry.owned_count.push_back(candidates.size());
    entry.muted_count.push_back(take);
  }
  return entry;
}

RelevanceResult RelevanceGuidedReuse(const MaskRegistry &registry,
                                     const NetworkParams &params,
                                     std::span<const TaskModel> previous,
                                     const Batch &current, TaskId task,
                                     double lambda) {
  if (task < 2) Fail(ErrorCode::kArgument, "relevance needs at least one earlier task");
  if (previous.size() < static_cast<std::size_t>(task - 1)) {
    Fail(ErrorCode::kState, "missing model of an earlier task");
  }
  RelevanceResult result;
  result.record.task = task;
  result.report.task = task;

  // Score first, mute afterwards: every evaluation sees the unmuted model.
  NetworkParams model = params;
  for (TaskId prev = 1; prev < task; ++prev) {
    const TaskModel &tm = previous[prev - 1];
    if (tm.biases == nullptr || tm.reuse == nullptr ||
        registry.StateOf(prev) != TaskState::kArchived) {
      Fail(ErrorCode::kState, "task " + std::to_string(prev) + " is not available");
    }
    RelevanceRow row;
    row.prev_task = prev;
    row.eval_mode = registry.IsCannibalized(prev) ? ViewMode::kMin : ViewMode::kMax;
    ApplyBiases(model, *tm.biases);
    const ParticipationView view = registry.ComposeView(prev, row.eval_mode, *tm.reuse);
    row.scores = Predict(model, view, current.inputs, current.dim);
    row.srcc = Srcc(row.scores, current.targets);
    row.reuse_ratio = ReuseRatio(row.srcc, lambda);
    result.report.rows.push_back(std::move(row));
  }
  for (RelevanceRow &row : result.report.rows) {
    ReuseEntry entry = MuteByMagnitude(registry, params, row.prev_task, row.reuse_ratio);
    entry.srcc = row.srcc;
    entry.eval_mode = row.eval_mode;
    row.owned_count = std::accumulate(entry.owned_count.begin(), entry.owned_count.end(),
                                      std::size_t{0});
    row.muted_count = std::accumulate(entry.muted_count.begin(), entry.muted_count.end(),
                                      std::size_t{0});
    result.record.entries.push_back(std::move(entry));
  }
  return result;
}

}  // namespace silf
