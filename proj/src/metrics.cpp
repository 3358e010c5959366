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

#include "silf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "silf/error.hpp"
#include "silf/textio.hpp"

namespace silf {

void ScoreMatrix::AppendRow(std::vector<double> row) {
  if (row.size() != rows_.size() + 1) {
    Fail(ErrorCode::kShape, "score row " + std::to_string(rows_.size() + 1) +
                                " must have " + std::to_string(rows_.size() + 1) +
                                " entries");
  }
  for (double v : row) {
    if (!(v >= -1.0 && v <= 1.0)) Fail(ErrorCode::kArgument, "score outside [-1, 1]");
  }
  rows_.push_back(std::move(row));
}

double ScoreMatrix::at(std::size_t after_task, std::size_t task) const {
  if (after_task < 1 || after_task > rows_.size() || task < 1 || task > after_task) {
    Fail(ErrorCode::kArgument, "score entry (" + std::to_string(after_task) + ", " +
                                   std::to_string(task) + ") is not defined");
  }
  return rows_[after_task - 1][task - 1];
}

const std::vector<double> &ScoreMatrix::row(std::size_t after_task) const {
  if (after_task < 1 || after_task > rows_.size()) {
    Fail(ErrorCode::kArgument, "score row " + std::to_string(after_task) + " missing");
  }
  return rows_[after_task - 1];
}

ScoreMatrix ScoreMatrix::Leading(std::size_t tasks) const {
  if (tasks > rows_.size()) Fail(ErrorCode::kArgument, "not enough score rows");
  ScoreMatrix out;
  out.rows_.assign(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(tasks));
  return out;
}

std::string ScoreMatrix::ToCsv() const {
  std::ostringstream os;
  const std::size_t t = rows_.size();
  os << "after_task";
  for (std::size_t i = 1; i <= t; ++i) os << ",task_" << i;
  os << '\n';
  for (std::size_t m = 0; m < t; ++m) {
    os << (m + 1);
    for (std::size_t i = 0; i < t; ++i) {
      os << ',';
      if (i <= m) os << FormatExact(rows_[m][i]);
    }
    os << '\n';
  }
  return os.str();
}

ScoreMatrix ScoreMatrix::FromCsv(const std::string &text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) Fail(ErrorCode::kParse, "score matrix: empty file");
  std::vector<std::string> header = SplitCsv(lines[0]);
  if (header.empty() || header[0] != "after_task") {
    Fail(ErrorCode::kParse, "score matrix line 1: bad header");
  }
  const std::size_t t = header.size() - 1;
  for (std::size_t i = 1; i <= t; ++i) {
    if (header[i] != "task_" + std::to_string(i)) {
      Fail(ErrorCode::kParse, "score matrix line 1: bad column " + header[i]);
    }
  }
  if (lines.size() - 1 != t) Fail(ErrorCode::kParse, "score matrix: row count mismatch");
  ScoreMatrix out;
  for (std::size_t m = 1; m <= t; ++m) {
    const std::string where = "score matrix line " + std::to_string(m + 1);
    std::vector<std::string> cells = SplitCsv(lines[m]);
    if (cells.size() != t + 1 || cells[0] != std::to_string(m)) {
      Fail(ErrorCode::kParse, where + ": malformed row");
    }
    std::vector<double> row;
    for (std::size_t i = 1; i <= m; ++i) row.push_back(ParseDouble(cells[i], where));
    for (std::size_t i = m + 1; i <= t; ++i) {
      if (!cells[i].empty()) Fail(ErrorCode::kParse, where + ": entry above diagonal");
    }
    out.AppendRow(std::move(row));
  }
  return out;
}

double AverageAccuracy(const ScoreMatrix &m) {
  const std::size_t t = m.tasks();
  if (t == 0) Fail(ErrorCode::kState, "average accuracy of an empty matrix");
  double sum = 0.0;
  for (std::size_t i = 1; i <= t; ++i) sum += m.at(t, i);
  return sum / static_cast<double>(t);
}

double AverageForgetting(const ScoreMatrix &m) {
  const std::size_t t = m.tasks();
  if (t < 2) Fail(ErrorCode::kState, "average forgetting needs at least two tasks");
  double sum = 0.0;
  for (std::size_t i = 1; i < t; ++i) {
    // rows before i do not score task i; the max runs over rows i..T
    double worst = m.at(t, i) - m.at(t, i);
    for (std::size_t r = i; r <= t; ++r) worst = std::max(worst, m.at(r, i) - m.at(t, i));
    sum += worst;
  }
  return sum / static_cast<double>(t - 1);
}

double AveragePlasticity(const ScoreMatrix &m) {
  const std::size_t t = m.tasks();
  if (t == 0) Fail(ErrorCode::kState, "average plasticity of an empty matrix");
  double sum = 0.0;
  for (std::size_t i = 1; i <= t; ++i) sum += m.at(i, i);
  return sum / static_cast<double>(t);
}

MetricsSummary Summarize(const ScoreMatrix &m) {
  MetricsSummary s;
  s.tasks = m.tasks();
  s.average_accuracy = AverageAccuracy(m);
  s.average_plasticity = AveragePlasticity(m);
  s.average_forgetting = m.tasks() >= 2 ? AverageForgetting(m) : 0.0;
  return s;
}

ScoreMatrix MeanMatrix(const std::vector<ScoreMatrix> &matrices) {
  if (matrices.empty()) Fail(ErrorCode::kArgument, "no matrices to average");
  const std::size_t t = matrices.front().tasks();
  ScoreMatrix out;
  for (std::size_t m = 1; m <= t; ++m) {
    std::vector<double> row(m, 0.0);
    for (const ScoreMatrix &mat : matrices) {
      if (mat.tasks() != t) Fail(ErrorCode::kShape, "matrices differ in size");
      for (std::size_t i = 1; i <= m; ++i) row[i - 1] += mat.at(m, i);
    }
    for (double &v : row) v /= static_cast<double>(matrices.size());
    out.AppendRow(std::move(row));
  }
  return out;
}

std::string FormatScore(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace silf
