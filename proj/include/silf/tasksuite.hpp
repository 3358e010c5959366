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

#ifndef SILF_TASKSUITE_HPP_
#define SILF_TASKSUITE_HPP_

// Synthetic bounded-target regression tasks with controllable relevance.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "silf/neuralcore.hpp"

namespace silf {

enum class Generator { kLinearSigmoid, kRbfMixture, kAnti };

const char *GeneratorName(Generator g);
Generator ParseGenerator(const std::string &name);

struct SyntheticTaskSpec {
  Generator generator = Generator::kLinearSigmoid;
  std::size_t input_dim = 8;
  std::size_t sample_count = 2000;
  // Degrees between this task's direction and the reference task's.
  double relevance_angle = 0.0;
  // 1-based suite index of the reference task; 0 makes this task its own
  // reference (random direction).
  int reference = 0;
  // 1-based suite index negated by kAnti.
  int base = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;

  bool operator==(const SyntheticTaskSpec &) const = default;
};

struct Samples {
  std::size_t dim = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  Batch AsBatch() const { return Batch{inputs, targets, dim}; }
};

enum class Split { kTrain, kTest, kAll };

const char *SplitName(Split s);
Split ParseSplit(const std::string &name);

struct Dataset {
  std::size_t dim = 0;
  std::vector<double> inputs;  // rows x dim
  std::vector<double> targets;
  std::vector<std::uint8_t> is_train;

  std::size_t rows() const { return targets.size(); }
  std::size_t TrainCount() const;
  Samples Subset(Split split) const;
  // Targets in [0,1], splits partition the rows, shapes agree.
  void Validate() const;

  bool operator==(const Dataset &) const = default;
};

class TaskSuite {
 public:
  explicit TaskSuite(std::vector<SyntheticTaskSpec> specs);

  // Six tasks of 2000 samples in 8 dimensions: linear reference, 30 deg,
  // 90 deg, anti(1), 45 deg, rbf mixture. Seeds derive from `seed`.
  static TaskSuite Default(std::uint64_t seed, std::size_t tasks = 6);

  std::size_t size() const { return specs_.size(); }
  const SyntheticTaskSpec &spec(std::size_t index) const;
  const std::vector<SyntheticTaskSpec> &specs() const { return specs_; }

  Dataset Generate(std::size_t index) const;
  std::vector<Dataset> GenerateAll() const;

  // Noise-free targets of task `index` on arbitrary inputs, min-max rescaled
  // over those inputs.
  std::vector<double> CleanTargets(std::size_t index,
                                   std::span<const double> inputs) const;

  // Unit weight direction of a linear-sigmoid task.
  std::vector<double> Direction(std::size_t index) const;

 private:
  std::vector<double> RawScores(std::size_t index, std::span<const double> inputs,
                                bool noisy) const;

  std::vector<SyntheticTaskSpec> specs_;
};

std::vector<double> UniformInputs(std::uint64_t seed, std::string_view stream,
                                  std::size_t rows, std::size_t dim);

// Fresh random split with the same train fraction.
Dataset Resplit(const Dataset &data, double train_fraction, std::uint64_t seed);

// trials == 1 returns the original split; further trials resplit with seeds
// derived from `seed`.
std::vector<Dataset> RepeatSplits(const Dataset &data, std::size_t trials,
                                  double train_fraction, std::uint64_t seed);

// Columns x_1..x_d,y,split ; numbers with 17 significant digits.
std::string DatasetToCsv(const Dataset &data);
Dataset DatasetFromCsv(const std::string &text);
void SaveCsv(const Dataset &data, const std::string &path);
Dataset LoadCsv(const std::string &path);

}  // namespace silf

#endif  // SILF_TASKSUITE_HPP_
