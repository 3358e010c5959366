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

#include "silf/engine.hpp"

#include <cmath>
#include <sstream>

#include "silf/error.hpp"
#include "silf/rng.hpp"

namespace silf {

namespace {

std::string Tag(TaskId t) { return std::to_string(t); }

// Runs fn, prefixing any error with the task and phase.
template <typename Fn>
auto InPhase(TaskId t, const std::string &phase, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error &e) {
    throw Error(e.code(), "task " + Tag(t) + ", phase " + phase + ": " + e.what());
  }
}

double InitLimit(const LayerSpec &ls) {
  const double fan_in = static_cast<double>(ls.in_dim);
  const double fan_out = static_cast<double>(ls.out_dim);
  return ls.activation == Activation::kRelu ? std::sqrt(6.0 / fan_in)
                                            : std::sqrt(6.0 / (fan_in + fan_out));
}

void CheckRatioList(const std::vector<double> &ratios, int n, const char *name) {
  if (static_cast<int>(ratios.size()) != n) {
    std::ostringstream os;
    os << name << " must list n = " << n << " ratios, got " << ratios.size();
    Fail(ErrorCode::kValidation, os.str());
  }
  for (double r : ratios) {
    if (!(r >= 0.0 && r < 1.0)) {
      std::ostringstream os;
      os << name << " entry " << r << " outside [0, 1)";
      Fail(ErrorCode::kValidation, os.str());
    }
  }
}

}  // namespace

const char *ReclaimPolicyName(ReclaimPolicy p) {
  return p == ReclaimPolicy::kReinit ? "reinit" : "keep-values";
}

ReclaimPolicy ParseReclaimPolicy(const std::string &name) {
  if (name == "reinit") return ReclaimPolicy::kReinit;
  if (name == "keep-values") return ReclaimPolicy::kKeepValues;
  Fail(ErrorCode::kValidation, "reclaim_policy must be reinit or keep-values");
}

const char *BaselineName(Baseline b) {
  switch (b) {
    case Baseline::kSilf: return "SILF";
    case Baseline::kSeparate: return "SL";
    case Baseline::kNoRemember: return "NO-RL";
    case Baseline::kNoRelevance: return "NO-RR";
  }
  return "?";
}

Baseline ParseBaseline(const std::string &name) {
  if (name == "SILF") return Baseline::kSilf;
  if (name == "SL") return Baseline::kSeparate;
  if (name == "NO-RL") return Baseline::kNoRemember;
  if (name == "NO-RR") return Baseline::kNoRelevance;
  Fail(ErrorCode::kValidation, "baseline must be SL, NO-RL or NO-RR");
}

NetSpec DefaultNetSpec(std::size_t input_dim) {
  return NetSpec{{input_dim, 32, Activation::kRelu},
                 {32, 16, Activation::kRelu},
                 {16, 1, Activation::kSigmoid}};
}

std::vector<std::string> SequenceConfig::Validate() const {
  std::vector<std::string> warnings;
  try {
    ValidateNetSpec(net);
  } catch (const Error &e) {
    Fail(ErrorCode::kValidation, std::string("net: ") + e.what());
  }
  if (preset_tasks < 1) Fail(ErrorCode::kValidation, "n must be >= 1");
  if (additional_tasks < 0) Fail(ErrorCode::kValidation, "k must be >= 0");
  if (additional_tasks > preset_tasks) {
    std::ostringstream os;
    os << "k <= n violated (n=" << preset_tasks << ", k=" << additional_tasks
       << "): each additional task needs its own preset task to reclaim from";
    Fail(ErrorCode::kValidation, os.str());
  }
  if (preset_tasks + additional_tasks > 32767) Fail(ErrorCode::kValidation, "too many tasks");
  CheckRatioList(first_ratios, preset_tasks, "first_ratios");
  CheckRatioList(second_ratios, preset_tasks, "second_ratios");
  if (!(lambda >= 0.0 && lambda <= 1.0)) Fail(ErrorCode::kValidation, "lambda outside [0, 1]");
  if (epochs_initial < 1 || epochs_cycle < 1 || cycles < 1 || epochs_additional < 1) {
    Fail(ErrorCode::kValidation, "epoch counts and cycles must be >= 1");
  }
  if (batch_size < 1) Fail(ErrorCode::kValidation, "batch_size must be >= 1");
  if (probe_count < 1) Fail(ErrorCode::kValidation, "probe_count must be >= 1");
  try {
    optimizer.Validate();
  } catch (const Error &e) {
    Fail(ErrorCode::kValidation, std::string("optimizer: ") + e.what());
  }
  if (first_ratios.back() != 0.0) {
    warnings.push_back("last first-pruning ratio is not 0; free weights stay unused");
  }
  return warnings;
}

const TaskRecord &Checkpoint::task(TaskId t) const {
  if (t < 1 || t > trained()) {
    Fail(ErrorCode::kArgument, "task " + Tag(t) + " is not in the checkpoint");
  }
  return tasks[static_cast<std::size_t>(t - 1)];
}

ViewMode DefaultMode(const Checkpoint &ckpt, TaskId task) {
  ckpt.task(task);
  return ckpt.registry.IsCannibalized(task) ? ViewMode::kMin : ViewMode::kMax;
}

ParticipationView TaskView(const Checkpoint &ckpt, TaskId task, ViewMode mode) {
  return ckpt.registry.ComposeView(task, mode, ckpt.task(task).reuse);
}

std::vector<double> PredictTask(const Checkpoint &ckpt, TaskId task,
                                std::span<const double> inputs,
                                std::optional<ViewMode> mode) {
  const TaskRecord &rec = ckpt.task(task);
  const ViewMode m = mode.value_or(DefaultMode(ckpt, task));
  const ParticipationView view = TaskView(ckpt, task, m);
  NetworkParams model = ckpt.params;
  ApplyBiases(model, rec.biases);
  return Predict(model, view, inputs, model.InputDim());
}

double EvaluateTask(const Checkpoint &ckpt, TaskId task, const Samples &samples,
                    std::optional<ViewMode> mode) {
  return Srcc(PredictTask(ckpt, task, samples.inputs, mode), samples.targets);
}

int TaskEpochBudget(const SequenceConfig &config, TaskId task) {
  if (task <= config.preset_tasks) {
    return config.epochs_initial + 2 * config.cycles * config.epochs_cycle;
  }
  return config.epochs_additional;
}

void CyclicFinetune(NetworkParams &params, const MaskRegistry &registry,
                    TaskId task, const ReuseRecord &reuse, const Samples &train,
                    const SequenceConfig &config, OptimizerState &opt,
                    std::uint64_t seed) {
  const TaskState s = registry.StateOf(task);
  if (s != TaskState::kSecondPruned) {
    Fail(ErrorCode::kState, "cyclic fine-tuning needs both prunings of task " + Tag(task));
  }
  if (config.cycles <= 0) return;
  const ParticipationView min_view =
      registry.TrainableView(task, TrainPhase::kMinFinetune, reuse);
  const ParticipationView max_view =
      registry.TrainableView(task, TrainPhase::kMaxFinetune, reuse);
  const TrainOptions options{config.batch_size, seed};
  const Batch batch = train.AsBatch();
  for (int c = 0; c < config.cycles; ++c) {
    TrainEpochs(params, min_view, batch, opt, config.epochs_cycle, options);
    TrainEpochs(params, max_view, batch, opt, config.epochs_cycle, options);
  }
}

Learner::Learner(SequenceConfig config)
    : config_(std::move(config)),
      ckpt_{NetworkParams{}, MaskRegistry(config_.net, config_.preset_tasks,
                                          config_.additional_tasks),
            {}} {
  config_.Validate();
  Rng rng(config_.seed, "init");
  ckpt_.params = NetworkParams::Initialize(config_.net, rng);
}

void Learner::Mark(TaskRecord &rec, const std::string &phase) {
  rec.phases.push_back(PhaseMark{phase, ++clock_});
}

void Learner::Enter(TaskId t, const std::string &phase) {
  if (hook_) hook_(ckpt_, t, phase);
}

void Learner::Train(TaskId t, const ParticipationView &view, const Samples &train,
                    OptimizerState &opt, int epochs) {
  const TrainOptions options{config_.batch_size,
                             DeriveSeed(config_.seed, "train/" + Tag(t))};
  TrainEpochs(ckpt_.params, view, train.AsBatch(), opt, epochs, options);
}

TaskStats Learner::LearnTask(const Dataset &data, const std::string &dataset_id) {
  const TaskId t = ckpt_.trained() + 1;
  const int n = config_.preset_tasks;
  if (t > config_.total_tasks()) {
    Fail(ErrorCode::kScalabilityExceeded,
         "task " + Tag(t) + " exceeds n + k = " + Tag(config_.total_tasks()));
  }
  if (data.dim != ckpt_.params.InputDim()) {
    Fail(ErrorCode::kShape, "task " + Tag(t) + ": dataset dimension " +
                                std::to_string(data.dim) + " != network input " +
                                std::to_string(ckpt_.params.InputDim()));
  }
  data.Validate();
  const Samples train = data.Subset(Split::kTrain);
  MaskRegistry &reg = ckpt_.registry;

  TaskStats stats;
  stats.task = t;
  stats.free_before = reg.CountLabel(0);

  TaskRecord rec;
  rec.id = t;
  rec.stage = t <= n ? Stage::kPreset : Stage::kAdditional;
  rec.dataset_id = dataset_id;
  rec.reuse.task = t;
  rec.probe.inputs = UniformInputs(DeriveSeed(config_.seed, "probe/" + Tag(t)), "probe",
                                   config_.probe_count, data.dim);

  if (t >= 2) {
    Enter(t, "relevance");
    InPhase(t, "relevance", [&] {
      std::vector<TaskModel> previous;
      for (const TaskRecord &r : ckpt_.tasks) previous.push_back(TaskModel{&r.biases, &r.reuse});
      RelevanceResult rel = RelevanceGuidedReuse(reg, ckpt_.params, previous,
                                                 train.AsBatch(), t, config_.lambda);
      rec.reuse = std::move(rel.record);
      relevance_.push_back(std::move(rel.report));
    });
    Mark(rec, "relevance");
  }

  // Each task starts from its own zero biases.
  ApplyBiases(ckpt_.params, ZeroBiases(config_.net));
  OptimizerState opt = config_.optimizer;
  opt.current_epoch = 0;

  if (rec.stage == Stage::kPreset) {
    InPhase(t, "begin", [&] { reg.BeginPresetTask(t); });
    if (t >= 2) {
      // Free weights were zeroed by earlier prunings; restart them.
      Rng rng(config_.seed, "free-init/" + Tag(t));
      for (std::size_t l = 0; l < ckpt_.params.layers.size(); ++l) {
        DenseLayer &layer = ckpt_.params.layers[l];
        const double limit = InitLimit(layer.spec);
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          if (reg.current()[l][i] == 0) layer.weights[i] = rng.Uniform(-limit, limit);
        }
      }
    }
    Enter(t, "initial");
    InPhase(t, "initial", [&] {
      const ParticipationView view = reg.TrainableView(t, TrainPhase::kInitial, rec.reuse);
      Train(t, view, train, opt, config_.epochs_initial);
    });
    Mark(rec, "initial");

    InPhase(t, "first-prune", [&] {
      stats.prunes.push_back(
          reg.FirstPrune(ckpt_.params, t, config_.first_ratios[static_cast<std::size_t>(t - 1)]));
    });
    Mark(rec, "first-prune");
    InPhase(t, "second-prune", [&] {
      stats.prunes.push_back(
          reg.SecondPrune(ckpt_.params, t, config_.second_ratios[static_cast<std::size_t>(t - 1)]));
    });
    Mark(rec, "second-prune");

    Enter(t, "cyclic-finetune");
    InPhase(t, "cyclic-finetune", [&] {
      CyclicFinetune(ckpt_.params, reg, t, rec.reuse, train, config_, opt,
                     DeriveSeed(config_.seed, "train/" + Tag(t)));
      stats.trainable =
          CountSet(reg.TrainableView(t, TrainPhase::kMaxFinetune, rec.reuse).trainable);
    });
    Mark(rec, "cyclic-finetune");
  } else {
    InPhase(t, "reclaim", [&] {
      ReclaimOutcome rc = reg.Reclaim(t);
      stats.reclaimed = rc.count;
      if (config_.reclaim_policy == ReclaimPolicy::kReinit) {
        Rng rng(config_.seed, "reclaim/" + Tag(t));
        for (std::size_t l = 0; l < rc.positions.size(); ++l) {
          for (std::size_t i = 0; i < rc.positions[l].size(); ++i) {
            if (rc.positions[l][i]) ckpt_.params.layers[l].weights[i] = rng.Uniform(-0.01, 0.01);
          }
        }
      }
    });
    Mark(rec, "reclaim");
    Enter(t, "finetune");
    InPhase(t, "finetune", [&] {
      const ParticipationView view = reg.TrainableView(t, TrainPhase::kMaxFinetune, rec.reuse);
      stats.trainable = CountSet(view.trainable);
      Train(t, view, train, opt, config_.epochs_additional);
    });
    Mark(rec, "finetune");
  }

  InPhase(t, "archive", [&] { reg.Archive(t); });
  rec.biases = ExtractBiases(ckpt_.params);
  ckpt_.tasks.push_back(std::move(rec));
  InPhase(t, "probe", [&] {
    TaskRecord &stored = ckpt_.tasks.back();
    stored.probe.eval_predictions = PredictTask(ckpt_, t, stored.probe.inputs);
    stored.probe.min_predictions = PredictTask(ckpt_, t, stored.probe.inputs, ViewMode::kMin);
  });
  Mark(ckpt_.tasks.back(), "archive");

  stats.free_after = reg.CountLabel(0);
  stats.weight_count = ckpt_.params.WeightCount();
  stats.mask_bytes = reg.StorageBytes();
  return stats;
}

SequenceResult RunSequence(const SequenceConfig &config,
                           const std::vector<Dataset> &datasets, PhaseHook hook) {
  config.Validate();
  if (static_cast<int>(datasets.size()) != config.total_tasks()) {
    Fail(ErrorCode::kValidation, "expected " + Tag(config.total_tasks()) +
                                     " datasets, got " + std::to_string(datasets.size()));
  }
  Learner learner(config);
  learner.set_phase_hook(std::move(hook));
  SequenceResult result{learner.checkpoint(), {}, {}, {}, {}};
  std::vector<Samples> tests;
  for (const Dataset &d : datasets) tests.push_back(d.Subset(Split::kTest));

  for (std::size_t m = 1; m <= datasets.size(); ++m) {
    result.stats.push_back(learner.LearnTask(datasets[m - 1], "task_" + std::to_string(m)));
    const Checkpoint &ckpt = learner.checkpoint();
    std::vector<double> row;
    ProbeSnapshot snap;
    snap.after_task = static_cast<TaskId>(m);
    for (TaskId i = 1; i <= static_cast<TaskId>(m); ++i) {
      row.push_back(InPhase(i, "evaluate", [&] {
        return EvaluateTask(ckpt, i, tests[static_cast<std::size_t>(i - 1)]);
      }));
      const std::vector<double> &probe = ckpt.task(i).probe.inputs;
      snap.eval.push_back(PredictTask(ckpt, i, probe));
      snap.min.push_back(PredictTask(ckpt, i, probe, ViewMode::kMin));
    }
    result.scores.AppendRow(std::move(row));
    result.history.push_back(std::move(snap));
  }
  result.checkpoint = learner.checkpoint();
  result.relevance = learner.relevance();
  return result;
}

ScoreMatrix RunBaseline(const SequenceConfig &config,
                        const std::vector<Dataset> &datasets, Baseline mode) {
  if (mode == Baseline::kSilf) return RunSequence(config, datasets).scores;
  if (mode == Baseline::kNoRelevance) {
    SequenceConfig c = config;
    c.lambda = 0.0;
    return RunSequence(c, datasets).scores;
  }
  config.Validate();
  if (static_cast<int>(datasets.size()) != config.total_tasks()) {
    Fail(ErrorCode::kValidation, "expected " + Tag(config.total_tasks()) +
                                     " datasets, got " + std::to_string(datasets.size()));
  }
  const ParticipationView full = ParticipationView::Full(config.net);
  std::vector<Samples> tests;
  for (const Dataset &d : datasets) tests.push_back(d.Subset(Split::kTest));

  std::vector<NetworkParams> models;
  Rng init(config.seed, "init");
  NetworkParams shared = NetworkParams::Initialize(config.net, init);
  ScoreMatrix scores;
  for (std::size_t m = 1; m <= datasets.size(); ++m) {
    const TaskId t = static_cast<TaskId>(m);
    const Samples train = datasets[m - 1].Subset(Split::kTrain);
    OptimizerState opt = config.optimizer;
    opt.current_epoch = 0;
    const TrainOptions options{config.batch_size, DeriveSeed(config.seed, "train/" + Tag(t))};
    InPhase(t, BaselineName(mode), [&] {
      if (mode == Baseline::kSeparate) {
        Rng rng(config.seed, "sl/" + Tag(t));
        NetworkParams model = NetworkParams::Initialize(config.net, rng);
        TrainEpochs(model, full, train.AsBatch(), opt, TaskEpochBudget(config, t), options);
        models.push_back(std::move(model));
      } else {
        TrainEpochs(shared, full, train.AsBatch(), opt, TaskEpochBudget(config, t), options);
      }
    });
    std::vector<double> row;
    for (std::size_t i = 1; i <= m; ++i) {
      const NetworkParams &model = mode == Baseline::kSeparate ? models[i - 1] : shared;
      const Samples &test = tests[i - 1];
      row.push_back(Srcc(Predict(model, full, test.inputs, test.dim), test.targets));
    }
    scores.AppendRow(std::move(row));
  }
  return scores;
}

}  // namespace silf
