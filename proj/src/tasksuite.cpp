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

#include "silf/tasksuite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "silf/error.hpp"
#include "silf/rng.hpp"
#include "silf/textio.hpp"

namespace silf {

namespace {

constexpr std::size_t kRbfCenters = 4;

std::vector<double> RandomUnit(Rng &rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double &x : v) {
      x = rng.Normal();
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double &x : v) x /= norm;
  return v;
}

void RescaleUnit(std::vector<double> &values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double span = *hi - *lo;
  if (span == 0.0) {
    for (double &v : values) v = 0.5;
    return;
  }
  for (double &v : values) v = std::clamp((v - min) / span, 0.0, 1.0);
}

std::vector<std::uint8_t> MakeSplit(std::size_t rows, double train_fraction,
                                    std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, "split");
  rng.Shuffle(std::span<std::size_t>(order));
  const std::size_t train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows)));
  std::vector<std::uint8_t> is_train(rows, 0);
  for (std::size_t k = 0; k < train; ++k) is_train[order[k]] = 1;
  return is_train;
}

}  // namespace

const char *GeneratorName(Generator g) {
  switch (g) {
    case Generator::kLinearSigmoid: return "linear-sigmoid";
    case Generator::kRbfMixture: return "rbf-mixture";
    case Generator::kAnti: return "anti";
  }
  return "?";
}

Generator ParseGenerator(const std::string &name) {
  if (name == "linear-sigmoid") return Generator::kLinearSigmoid;
  if (name == "rbf-mixture") return Generator::kRbfMixture;
  if (name == "anti") return Generator::kAnti;
  Fail(ErrorCode::kArgument, "unknown generator '" + name + "'");
}

const char *SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kAll: return "all";
  }
  return "?";
}

Split ParseSplit(const std::string &name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  if (name == "all") return Split::kAll;
  Fail(ErrorCode::kArgument, "unknown split '" + name + "'");
}

std::size_t Dataset::TrainCount() const {
  return static_cast<std::size_t>(std::count(is_train.begin(), is_train.end(), 1));
}

Samples Dataset::Subset(Split split) const {
  Samples out;
  out.dim = dim;
  for (std::size_t r = 0; r < rows(); ++r) {
    const bool take = split == Split::kAll || (split == Split::kTrain) == (is_train[r] != 0);
    if (!take) continue;
    out.inputs.insert(out.inputs.end(), inputs.begin() + static_cast<std::ptrdiff_t>(r * dim),
                      inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim));
    out.targets.push_back(targets[r]);
  }
  return out;
}

void Dataset::Validate() const {
  if (dim == 0) Fail(ErrorCode::kShape, "dataset has zero input dimension");
  if (inputs.size() != rows() * dim || is_train.size() != rows()) {
    Fail(ErrorCode::kShape, "dataset columns disagree in length");
  }
  for (double y : targets) {
    if (!(y >= 0.0 && y <= 1.0)) Fail(ErrorCode::kArgument, "target outside [0, 1]");
  }
  for (double x : inputs) {
    if (!std::isfinite(x)) Fail(ErrorCode::kArgument, "non-finite input");
  }
  for (std::uint8_t s : is_train) {
    if (s > 1) Fail(ErrorCode::kArgument, "bad split flag");
  }
}

TaskSuite::TaskSuite(std::vector<SyntheticTaskSpec> specs) : specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const SyntheticTaskSpec &s = specs_[i];
    const std::string who = "task spec " + std::to_string(i + 1);
    const int self = static_cast<int>(i + 1);
    if (s.input_dim < 1 || s.sample_count < 2) {
      Fail(ErrorCode::kArgument, who + ": input_dim >= 1 and sample_count >= 2 required");
    }
    if (!(s.noise_sigma >= 0.0)) Fail(ErrorCode::kArgument, who + ": noise_sigma < 0");
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
      Fail(ErrorCode::kArgument, who + ": train_fraction outside (0, 1)");
    }
    if (!(s.relevance_angle >= 0.0 && s.relevance_angle <= 180.0)) {
      Fail(ErrorCode::kArgument, who + ": relevance_angle outside [0, 180]");
    }
    switch (s.generator) {
      case Generator::kLinearSigmoid:
        if (s.base != 0) Fail(ErrorCode::kArgument, who + ": base only applies to anti");
        if (s.reference != 0) {
          if (s.reference < 1 || s.reference >= self) {
            Fail(ErrorCode::kArgument, who + ": reference must name an earlier task");
          }
          const SyntheticTaskSpec &ref = specs_[static_cast<std::size_t>(s.reference - 1)];
          if (ref.generator != Generator::kLinearSigmoid) {
            Fail(ErrorCode::kArgument, who + ": reference must be linear-sigmoid");
          }
          if (ref.input_dim != s.input_dim) {
            Fail(ErrorCode::kArgument, who + ": reference has another input_dim");
          }
        }
        break;
      case Generator::kRbfMixture:
        if (s.base != 0 || s.reference != 0) {
          Fail(ErrorCode::kArgument, who + ": rbf-mixture takes no base or reference");
        }
        break;
      case Generator::kAnti:
        if (s.base < 1 || s.base >= self) {
          Fail(ErrorCode::kArgument, who + ": anti needs an earlier base task");
        }
        if (s.reference != 0) Fail(ErrorCode::kArgument, who + ": anti takes no reference");
        if (specs_[static_cast<std::size_t>(s.base - 1)].input_dim != s.input_dim) {
          Fail(ErrorCode::kArgument, who + ": base has another input_dim");
        }
        break;
    }
  }
}

TaskSuite TaskSuite::Default(std::uint64_t seed, std::size_t tasks) {
  std::vector<SyntheticTaskSpec> all(6);
  all[0].generator = Generator::kLinearSigmoid;
  all[1].generator = Generator::kLinearSigmoid;
  all[1].reference = 1;
  all[1].relevance_angle = 30.0;
  all[2].generator = Generator::kLinearSigmoid;
  all[2].reference = 1;
  all[2].relevance_angle = 90.0;
  all[3].generator = Generator::kAnti;
  all[3].base = 1;
  all[4].generator = Generator::kLinearSigmoid;
  all[4].reference = 1;
  all[4].relevance_angle = 45.0;
  all[5].generator = Generator::kRbfMixture;
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i].seed = DeriveSeed(seed, "task/" + std::to_string(i + 1));
  }
  if (tasks > all.size()) Fail(ErrorCode::kArgument, "default suite has six tasks");
  all.resize(tasks);
  return TaskSuite(std::move(all));
}

const SyntheticTaskSpec &TaskSuite::spec(std::size_t index) const {
  if (index < 1 || index > specs_.size()) {
    Fail(ErrorCode::kArgument, "no task " + std::to_string(index) + " in suite");
  }
  return specs_[index - 1];
}

std::vector<double> TaskSuite::Direction(std::size_t index) const {
  const SyntheticTaskSpec &s = spec(index);
  if (s.generator != Generator::kLinearSigmoid) {
    Fail(ErrorCode::kArgument, "task " + std::to_string(index) + " has no direction");
  }
  Rng rng(s.seed, "direction");
  std::vector<double> own = RandomUnit(rng, s.input_dim);
  if (s.reference == 0) return own;

  const std::vector<double> ref = Direction(static_cast<std::size_t>(s.reference));
  // Orthogonal complement of ref inside span(ref, own).
  double dot = std::inner_product(own.begin(), own.end(), ref.begin(), 0.0);
  for (std::size_t i = 0; i < own.size(); ++i) own[i] -= dot * ref[i];
  double norm = std::sqrt(std::inner_product(own.begin(), own.end(), own.begin(), 0.0));
  while (norm < 1e-9) {
    own = RandomUnit(rng, s.input_dim);
    dot = std::inner_product(own.begin(), own.end(), ref.begin(), 0.0);
    for (std::size_t i = 0; i < own.size(); ++i) own[i] -= dot * ref[i];
    norm = std::sqrt(std::inner_product(own.begin(), own.end(), own.begin(), 0.0));
  }
  const double theta = s.relevance_angle * std::numbers::pi / 180.0;
  std::vector<double> w(own.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::cos(theta) * ref[i] + std::sin(theta) * own[i] / norm;
  }
  return w;
}

std::vector<double> TaskSuite::RawScores(std::size_t index, std::span<const double> inputs,
                                         bool noisy) const {
  const SyntheticTaskSpec &s = spec(index);
  const std::size_t d = s.input_dim;
  if (inputs.size() % d != 0) Fail(ErrorCode::kShape, "input matrix width mismatch");
  const std::size_t rows = inputs.size() / d;
  std::vector<double> raw(rows);
  Rng noise(s.seed, "noise");
  const double sigma = noisy ? s.noise_sigma : 0.0;

  switch (s.generator) {
    case Generator::kLinearSigmoid: {
      const std::vector<double> w = Direction(index);
      // Unit w on the [-1,1] cube gives w.x a standard deviation of 1/sqrt(3);
      // the slope maps +-2 std onto logistic(+-3), i.e. about [0.05, 0.95].
      const double slope = 3.0 / (2.0 / std::sqrt(3.0));
      for (std::size_t r = 0; r < rows; ++r) {
        double z = 0.0;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * inputs[r * d + j];
        if (sigma > 0.0) z += sigma * noise.Normal();
        raw[r] = 1.0 / (1.0 + std::exp(-slope * z));
      }
      break;
    }
    case Generator::kRbfMixture: {
      Rng rng(s.seed, "rbf");
      std::vector<double> centers(kRbfCenters * d);
      std::vector<double> amps(kRbfCenters);
      for (double &c : centers) c = rng.Uniform(-0.6, 0.6);
      for (double &a : amps) a = rng.Uniform(0.5, 1.5) * (rng.Uniform01() < 0.5 ? -1.0 : 1.0);
      const double width2 = 2.0 * 2.0;
      for (std::size_t r = 0; r < rows; ++r) {
        double y = 0.0;
        for (std::size_t c = 0; c < kRbfCenters; ++c) {
          double dist2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double diff = inputs[r * d + j] - centers[c * d + j];
            dist2 += diff * diff;
          }
          y += amps[c] * std::exp(-dist2 / width2);
        }
        if (sigma > 0.0) y += sigma * noise.Normal();
        raw[r] = y;
      }
      break;
    }
    case Generator::kAnti: {
      raw = RawScores(static_cast<std::size_t>(s.base), inputs, false);
      for (double &v : raw) v = -v;
      if (sigma > 0.0) {
        for (double &v : raw) v += sigma * noise.Normal();
      }
      break;
    }
  }
  return raw;
}

std::vector<double> TaskSuite::CleanTargets(std::size_t index,
                                            std::span<const double> inputs) const {
  std::vector<double> y = RawScores(index, inputs, false);
  RescaleUnit(y);
  return y;
}

Dataset TaskSuite::Generate(std::size_t index) const {
  const SyntheticTaskSpec &s = spec(index);
  Dataset data;
  data.dim = s.input_dim;
  data.inputs = UniformInputs(s.seed, "inputs", s.sample_count, s.input_dim);
  data.targets = RawScores(index, data.inputs, true);
  RescaleUnit(data.targets);
  data.is_train = MakeSplit(s.sample_count, s.train_fraction, s.seed);
  data.Validate();
  return data;
}

std::vector<Dataset> TaskSuite::GenerateAll() const {
  std::vector<Dataset> out;
  for (std::size_t i = 1; i <= specs_.size(); ++i) out.push_back(Generate(i));
  return out;
}

std::vector<double> UniformInputs(std::uint64_t seed, std::string_view stream,
                                  std::size_t rows, std::size_t dim) {
  Rng rng(seed, stream);
  std::vector<double> x(rows * dim);
  for (double &v : x) v = rng.Uniform(-1.0, 1.0);
  return x;
}

Dataset Resplit(const Dataset &data, double train_fraction, std::uint64_t seed) {
  Dataset out = data;
  out.is_train = MakeSplit(data.rows(), train_fraction, seed);
  return out;
}

std::vector<Dataset> RepeatSplits(const Dataset &data, std::size_t trials,
                                  double train_fraction, std::uint64_t seed) {
  if (trials < 1) Fail(ErrorCode::kArgument, "trials must be >= 1");
  std::vector<Dataset> out{data};
  for (std::size_t t = 1; t < trials; ++t) {
    out.push_back(Resplit(data, train_fraction, DeriveSeed(seed, "trial/" + std::to_string(t))));
  }
  return out;
}

std::string DatasetToCsv(const Dataset &data) {
  std::string out;
  for (std::size_t j = 1; j <= data.dim; ++j) out += "x_" + std::to_string(j) + ",";
  out += "y,split\n";
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t j = 0; j < data.dim; ++j) {
      out += FormatExact(data.inputs[r * data.dim + j]);
      out += ',';
    }
    out += FormatExact(data.targets[r]);
    out += data.is_train[r] ? ",train\n" : ",test\n";
  }
  return out;
}

Dataset DatasetFromCsv(const std::string &text) {
  const std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) Fail(ErrorCode::kParse, "line 1: missing header");
  const std::vector<std::string> header = SplitCsv(lines[0]);
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "split") {
    Fail(ErrorCode::kParse, "line 1: header must be x_1..x_d,y,split");
  }
  Dataset data;
  data.dim = header.size() - 2;
  for (std::size_t j = 0; j < data.dim; ++j) {
    if (header[j] != "x_" + std::to_string(j + 1)) {
      Fail(ErrorCode::kParse, "line 1: expected column x_" + std::to_string(j + 1) +
                                  ", found '" + header[j] + "'");
    }
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = "line " + std::to_string(k + 1);
    const std::vector<std::string> cells = SplitCsv(lines[k]);
    if (cells.size() != data.dim + 2) {
      Fail(ErrorCode::kParse, where + ": expected " + std::to_string(data.dim + 2) +
                                  " fields, found " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < data.dim; ++j) {
      data.inputs.push_back(ParseDouble(cells[j], where));
    }
    const double y = ParseDouble(cells[data.dim], where);
    if (!(y >= 0.0 && y <= 1.0)) Fail(ErrorCode::kParse, where + ": target outside [0, 1]");
    data.targets.push_back(y);
    const std::string &split = cells.back();
    if (split == "train") {
      data.is_train.push_back(1);
    } else if (split == "test") {
      data.is_train.push_back(0);
    } else {
      Fail(ErrorCode::kParse, where + ": split must be train or test");
    }
  }
  if (data.rows() == 0) Fail(ErrorCode::kParse, "no data rows");
  return data;
}

void SaveCsv(const Dataset &data, const std::string &path) {
  WriteFile(path, DatasetToCsv(data));
}

Dataset LoadCsv(const std::string &path) { return DatasetFromCsv(ReadFile(path)); }

}  // namespace silf
