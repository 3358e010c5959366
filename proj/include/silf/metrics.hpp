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

#ifndef SILF_METRICS_HPP_
#define SILF_METRICS_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace silf {

// Lower-triangular table of SRCC values: row m holds the score of tasks
// 1..m measured after the first m tasks were learned. Indices are 1-based.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;

  // Row m must have exactly m entries, each in [-1, 1].
  void AppendRow(std::vector<double> row);

  std::size_t tasks() const { return rows_.size(); }
  double at(std::size_t after_task, std::size_t task) const;
  const std::vector<double> &row(std::size_t after_task) const;

  // The first `tasks` rows; used for preset-only summaries.
  ScoreMatrix Leading(std::size_t tasks) const;

  // header: after_task,task_1,...,task_T ; empty cells above the diagonal
  std::string ToCsv() const;
  static ScoreMatrix FromCsv(const std::string &text);

  bool operator==(const ScoreMatrix &) const = default;

 private:
  std::vector<std::vector<double>> rows_;
};

double AverageAccuracy(const ScoreMatrix &m);
// Averages, over tasks 1..T-1, the largest drop from any row t in 1..T to
// the final row. Needs T >= 2.
double AverageForgetting(const ScoreMatrix &m);
double AveragePlasticity(const ScoreMatrix &m);

struct MetricsSummary {
  double average_accuracy = 0.0;
  double average_forgetting = 0.0;  // 0 when only one task was learned
  double average_plasticity = 0.0;
  std::size_t tasks = 0;
};

MetricsSummary Summarize(const ScoreMatrix &m);

// Element-wise mean of equally sized matrices.
ScoreMatrix MeanMatrix(const std::vector<ScoreMatrix> &matrices);

// Fixed 6-decimal rendering used in tables.
std::string FormatScore(double v);

}  // namespace silf

#endif  // SILF_METRICS_HPP_
