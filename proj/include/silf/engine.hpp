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

#ifndef SILF_ENGINE_HPP_
#define SILF_ENGINE_HPP_

// Task-incremental training with parameter isolation: preset tasks get a
// fresh allocation through two magnitude prunings and cyclic min/max
// fine-tuning; additional tasks train on weights reclaimed from one preset
// task each.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "silf/maskstore.hpp"
#include "silf/metrics.hpp"
#include "silf/neuralcore.hpp"
#include "silf/relevance.hpp"
#include "silf/tasksuite.hpp"

namespace silf {

enum class ReclaimPolicy { kKeepValues, kReinit };
enum class Stage : std::uint8_t { kPreset = 0, kAdditional = 1 };
enum class Baseline { kSilf, kSeparate, kNoRemember, kNoRelevance };

const char *ReclaimPolicyName(ReclaimPolicy p);
ReclaimPolicy ParseReclaimPolicy(const std::string &name);
const char *BaselineName(Baseline b);
Baseline ParseBaseline(const std::string &name);

struct SequenceConfig {
  NetSpec net;
  int preset_tasks = 3;       // n
  int additional_tasks = 3;   // k
  std::vector<double> first_ratios{0.7, 0.5, 0.0};
  std::vector<double> second_ratios{0.4, 0.4, 0.4};
  double lambda = 0.5;
  int epochs_initial = 20;
  int epochs_cycle = 5;
  int cycles = 2;
  int epochs_additional = 40;
  OptimizerState optimizer;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  ReclaimPolicy reclaim_policy = ReclaimPolicy::kReinit;
  std::size_t probe_count = 64;

  // Throws kValidation naming the violated constraint; returns warnings.
  std::vector<std::string> Validate() const;
  int total_tasks() const { return preset_tasks + additional_tasks; }
};

// Default regressor: input -> 32 relu -> 16 relu -> 1 sigmoid.
NetSpec DefaultNetSpec(std::size_t input_dim);

struct Probe {
  std::vector<double> inputs;
  // Predictions of the task's evaluation view and of its minimum view,
  // recorded when the task completed.
  std::vector<double> eval_predictions;
  std::vector<double> min_predictions;

  bool operator==(const Probe &) const = default;
};

struct PhaseMark {
  std::string phase;
  std::uint64_t step = 0;  // logical clock, not wall time

  bool operator==(const PhaseMark &) const = default;
};

struct TaskRecord {
  TaskId id = 0;
  Stage stage = Stage::kPreset;
  std::string dataset_id;
  ReuseRecord reuse;
  BiasSet biases;
  Probe probe;
  std::vector<PhaseMark> phases;

  bool operator==(const TaskRecord &) const = default;
};

struct Checkpoint {
  NetworkParams params;
  MaskRegistry registry;
  std::vector<TaskRecord> tasks;

  const TaskRecord &task(TaskId t) const;
  TaskId trained() const { return static_cast<TaskId>(tasks.size()); }
};

// Max view unless the task was cannibalized.
ViewMode DefaultMode(const Checkpoint &ckpt, TaskId task);

ParticipationView TaskView(const Checkpoint &ckpt, TaskId task, ViewMode mode);

std::vector<double> PredictTask(const Checkpoint &ckpt, TaskId task,
                                std::span<const double> inputs,
                                std::optional<ViewMode> mode = std::nullopt);

double EvaluateTask(const Checkpoint &ckpt, TaskId task, const Samples &samples,
                    std::optional<ViewMode> mode = std::nullopt);

// Counters gathered while a task is learned; not part of the checkpoint.
struct TaskStats {
  TaskId task = 0;
  std::size_t free_before = 0;
  std::size_t free_after = 0;
  std::size_t reclaimed = 0;
  std::size_t trainable = 0;  // weights trainable in the final phase
  std::size_t weight_count = 0;
  std::size_t mask_bytes = 0;
  std::vector<PruneOutcome> prunes;
};

using PhaseHook = std::function<void(const Checkpoint &, TaskId, const std::string &)>;

class Learner {
 public:
  explicit Learner(SequenceConfig config);

  // Learns the next task of the sequence.
  TaskStats LearnTask(const Dataset &data, const std::string &dataset_id);

  const Checkpoint &checkpoint() const { return ckpt_; }
  const SequenceConfig &config() const { return config_; }
  const std::vector<RelevanceReport> &relevance() const { return relevance_; }
  void set_phase_hook(PhaseHook hook) { hook_ = std::move(hook); }

 private:
  void Train(TaskId t, const ParticipationView &view, const Samples &train,
             OptimizerState &opt, int epochs);
  void Mark(TaskRecord &rec, const std::string &phase);
  void Enter(TaskId t, const std::string &phase);

  SequenceConfig config_;
  Checkpoint ckpt_;
  std::vector<RelevanceReport> relevance_;
  std::uint64_t clock_ = 0;
  PhaseHook hook_;
};

// Repeats config.cycles times: epochs_cycle epochs on the min view, then
// epochs_cycle on the max view. Only the task's own weights and biases move.
void CyclicFinetune(NetworkParams &params, const MaskRegistry &registry,
                    TaskId task, const ReuseRecord &reuse, const Samples &train,
                    const SequenceConfig &config, OptimizerState &opt,
                    std::uint64_t seed);

struct ProbeSnapshot {
  TaskId after_task = 0;
  // index t - 1: predictions of task t under its evaluation / minimum view
  std::vector<std::vector<double>> eval;
  std::vector<std::vector<double>> min;
};

struct SequenceResult {
  Checkpoint checkpoint;
  ScoreMatrix scores;
  std::vector<RelevanceReport> relevance;
  std::vector<TaskStats> stats;
  std::vector<ProbeSnapshot> history;
};

// datasets.size() must equal n + k.
SequenceResult RunSequence(const SequenceConfig &config,
                           const std::vector<Dataset> &datasets,
                           PhaseHook hook = nullptr);

// Score matrix of a comparison method. kNoRelevance runs the full pipeline
// with lambda = 0.
ScoreMatrix RunBaseline(const SequenceConfig &config,
                        const std::vector<Dataset> &datasets, Baseline mode);

// Epochs a task receives in total; baselines use the same budget.
int TaskEpochBudget(const SequenceConfig &config, TaskId task);

}  // namespace silf

#endif  // SILF_ENGINE_HPP_
