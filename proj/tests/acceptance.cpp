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

// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "silf/checkpoint.hpp"
#include "silf/config.hpp"
#include "silf/engine.hpp"
#include "silf/maskstore.hpp"
#include "silf/metrics.hpp"
#include "silf/relevance.hpp"
#include "silf/rng.hpp"
#include "silf/runner.hpp"
#include "silf/textio.hpp"

using namespace silf;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kRuntimeShortSec = 60.0;
constexpr double kRuntimeLongSec = 180.0;
constexpr double kCollapseMargin = 0.3;
constexpr double kAntiSrcc = -0.5;
constexpr double kRelatedSrcc = 0.5;
constexpr double kAntiRatioCeiling = 1.0 - 0.5 * 0.5;
constexpr std::size_t kMuteSlack = 1;
constexpr double kAccuracyTol = 1e-4;
constexpr double kFixtureTol = 1e-6;
constexpr double kSrccTol = 1e-12;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradFloor = 1e-6;
constexpr double kFdStep = 1e-6;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string &what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

int g_failures = 0;

void Report(int id, const char *title, const std::function<void(Verdict &)> &body) {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception &e) {
    v.Require(false, std::string("exception: ") + e.what());
  }
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++g_failures;
  std::printf("criterion %2d: %s  %s (%.2fs)%s%s\n", id, v.pass ? "PASS" : "FAIL", title, sec,
              v.detail.str().empty() ? "" : "  ", v.detail.str().c_str());
  std::fflush(stdout);
}

double Since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

SequenceConfig DefaultSequence(int n, int k) {
  RunConfig rc = ParseRunConfig("{}");
  SequenceConfig c = rc.sequence;
  c.preset_tasks = n;
  c.additional_tasks = k;
  return c;
}

std::vector<Dataset> DefaultData(std::size_t tasks, std::uint64_t seed = 0) {
  return TaskSuite::Default(seed, tasks).GenerateAll();
}

void CriterionZeroForgetting(Verdict &v) {
  const auto start = std::chrono::steady_clock::now();
  const SequenceResult r = RunSequence(DefaultSequence(3, 0), DefaultData(3));
  const double sec = Since(start);
  for (std::size_t j = 1; j <= 3; ++j) {
    const auto &then = r.history[j - 1].eval[j - 1];
    const auto &now = r.history[2].eval[j - 1];
    v.Require(then == now, "probe predictions of task " + std::to_string(j) + " drifted");
  }
  const double f = AverageForgetting(r.scores.Leading(3));
  v.Require(f == 0.0, "preset-stage forgetting " + FormatExact(f));
  v.Require(sec < kRuntimeShortSec, "runtime " + std::to_string(sec) + " s");
  v.detail << "F = " << FormatScore(f) << ", run " << sec << " s";
}

void CriterionReclamation(Verdict &v) {
  const auto start = std::chrono::steady_clock::now();
  const SequenceConfig cfg = DefaultSequence(3, 3);
  v.Require(cfg.first_ratios == std::vector<double>{0.7, 0.5, 0.0} &&
                cfg.second_ratios == std::vector<double>{0.4, 0.4, 0.4},
            "default ratios changed");
  const std::vector<Dataset> data = DefaultData(6);
  Learner learner(cfg);
  const std::size_t weights = learner.checkpoint().params.WeightCount();
  const std::size_t mask_bytes = learner.checkpoint().registry.StorageBytes();
  std::size_t bias_count = 0;
  for (const auto &layer : learner.checkpoint().params.layers) bias_count += layer.biases.size();

  std::vector<std::size_t> bar_population(4, 0);
  std::vector<std::vector<double>> min_before(4);
  for (TaskId t = 1; t <= 6; ++t) {
    const TaskStats s = learner.LearnTask(data[static_cast<std::size_t>(t - 1)], "t");
    const Checkpoint &ck = learner.checkpoint();
    v.Require(ck.params.WeightCount() == weights, "weight count changed");
    v.Require(ck.registry.StorageBytes() == mask_bytes, "mask storage changed");
    std::size_t biases = 0;
    for (const auto &layer : ck.params.layers) biases += layer.biases.size();
    v.Require(biases == bias_count, "bias count changed");
    if (t == 3) {
      v.Require(ck.registry.CountLabel(0) == 0, "free weights remain after task 3");
      for (TaskId j = 1; j <= 3; ++j) {
        bar_population[static_cast<std::size_t>(j)] =
            ck.registry.CountLabel(static_cast<MaskLabel>(-j));
        min_before[static_cast<std::size_t>(j)] =
            PredictTask(ck, j, ck.task(j).probe.inputs, ViewMode::kMin);
      }
    }
    if (t > 3) {
      const std::size_t donor = static_cast<std::size_t>(t - 3);
      v.Require(s.reclaimed == bar_population[donor],
                "task " + std::to_string(t) + " reclaimed " + std::to_string(s.reclaimed) +
                    " of " + std::to_string(bar_population[donor]));
      v.Require(s.trainable == bar_population[donor],
                "task " + std::to_string(t) + " trainable " + std::to_string(s.trainable));
    }
  }
  const Checkpoint &ck = learner.checkpoint();
  for (TaskId j = 1; j <= 3; ++j) {
    v.Require(ck.registry.IsCannibalized(j), "task " + std::to_string(j) + " not reclaimed");
    const auto after = PredictTask(ck, j, ck.task(j).probe.inputs, ViewMode::kMin);
    v.Require(after == min_before[static_cast<std::size_t>(j)],
              "min model of task " + std::to_string(j) + " changed");
  }
  const double sec = Since(start);
  v.Require(sec < kRuntimeLongSec, "runtime " + std::to_string(sec) + " s");
  v.detail << "reclaimed " << bar_population[1] << "/" << bar_population[2] << "/"
           << bar_population[3] << " weights, storage " << weights << " weights + "
           << mask_bytes << " mask bytes";
}

void CriterionForgettingContrast(Verdict &v) {
  const auto start = std::chrono::steady_clock::now();
  SequenceConfig cfg = DefaultSequence(2, 0);
  cfg.first_ratios = {0.7, 0.0};
  cfg.second_ratios = {0.4, 0.4};
  std::vector<SyntheticTaskSpec> specs(2);
  specs[0].seed = DeriveSeed(0, "task/1");
  specs[1].generator = Generator::kAnti;
  specs[1].base = 1;
  specs[1].seed = DeriveSeed(0, "task/2");
  const std::vector<Dataset> data = TaskSuite(specs).GenerateAll();
  const ScoreMatrix norl = RunBaseline(cfg, data, Baseline::kNoRemember);
  const ScoreMatrix silf = RunSequence(cfg, data).scores;
  v.Require(norl.at(2, 1) <= norl.at(1, 1) - kCollapseMargin, "NO-RL did not collapse");
  v.Require(silf.at(2, 1) == silf.at(1, 1), "SILF score of task 1 moved");
  const double sec = Since(start);
  v.Require(sec < kRuntimeShortSec, "runtime " + std::to_string(sec) + " s");
  v.detail << "NO-RL " << FormatScore(norl.at(1, 1)) << " -> " << FormatScore(norl.at(2, 1))
           << ", SILF " << FormatScore(silf.at(1, 1)) << " -> " << FormatScore(silf.at(2, 1));
}

void CriterionRelevanceBranches(Verdict &v) {
  const SequenceConfig cfg = DefaultSequence(3, 3);
  const SequenceResult r = RunSequence(cfg, DefaultData(6));
  bool anti = false, related = false;
  double lowest = 1.0, highest = -1.0;
  for (const RelevanceReport &rep : r.relevance) {
    for (const RelevanceRow &row : rep.rows) {
      lowest = std::min(lowest, row.srcc);
      highest = std::max(highest, row.srcc);
      if (row.srcc < kAntiSrcc && row.reuse_ratio <= kAntiRatioCeiling) anti = true;
      if (row.srcc > kRelatedSrcc && row.reuse_ratio == 1.0) related = true;
      v.Require(row.reuse_ratio == ReuseRatio(row.srcc, cfg.lambda), "reuse ratio mismatch");
    }
  }
  v.Require(anti, "no strongly negative pair muted");
  v.Require(related, "no strongly positive pair kept whole");
  std::size_t checked = 0;
  for (const TaskRecord &rec : r.checkpoint.tasks) {
    for (const ReuseEntry &e : rec.reuse.entries) {
      for (std::size_t l = 0; l < e.owned_count.size(); ++l) {
        const std::size_t want = oracle::Floor(1.0 - e.reuse_ratio, e.owned_count[l]);
        const std::size_t got = e.muted_count[l];
        std::size_t bits = 0;
        for (std::uint8_t b : e.muted[l]) bits += b;
        v.Require(bits == got, "muted bitmap disagrees with its count");
        v.Require((got > want ? got - want : want - got) <= kMuteSlack,
                  "task " + std::to_string(rec.id) + " vs " + std::to_string(e.prev_task) +
                      " layer " + std::to_string(l) + ": muted " + std::to_string(got) +
                      ", expected " + std::to_string(want));
        ++checked;
      }
    }
  }
  v.detail << "SRCC range [" << FormatScore(lowest) << ", " << FormatScore(highest) << "], "
           << checked << " layer mutes checked";
}

void CriterionMetricFixtures(Verdict &v) {
  ScoreMatrix six;
  for (std::size_t t = 1; t <= 5; ++t) six.AppendRow(std::vector<double>(t, 0.0));
  six.AppendRow({0.8472, 0.8779, 0.8680, 0.8569, 0.8765, 0.8645});
  const double a = AverageAccuracy(six);
  ScoreMatrix two;
  two.AppendRow({0.8039});
  two.AppendRow({0.0668, 0.8658});
  const double f = AverageForgetting(two);
  const double p = AveragePlasticity(two);
  v.Require(std::fabs(a - 0.8652) <= kAccuracyTol, "A = " + FormatExact(a));
  v.Require(std::fabs(f - 0.7371) <= kFixtureTol, "F = " + FormatExact(f));
  v.Require(std::fabs(p - 0.83485) <= kFixtureTol, "P = " + FormatExact(p));
  v.detail << "A " << a << ", F " << f << ", P " << p;
}

void CriterionSrccOracle(Verdict &v) {
  Rng r(20260101);
  double worst = 0.0, worst_mono = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + r.Below(48);
    const bool ties = trial % 2 == 1;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ties ? static_cast<double>(r.Below(5)) : r.Normal();
      b[i] = ties ? static_cast<double>(r.Below(5)) : r.Normal();
    }
    b[0] = 10.0;  // truth is never constant
    worst = std::max(worst, std::fabs(Srcc(a, b) - oracle::Spearman(a, b)));
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = std::exp(0.5 * a[i]) + a[i] * a[i] * a[i];
    worst_mono = std::max(worst_mono, std::fabs(Srcc(m, b) - Srcc(a, b)));
  }
  v.Require(worst <= kSrccTol, "oracle gap " + FormatExact(worst));
  v.Require(worst_mono <= kSrccTol, "monotone gap " + FormatExact(worst_mono));
  v.detail << "max oracle gap " << worst << ", max monotone gap " << worst_mono;
}

void CriterionGradient(Verdict &v) {
  Rng r(777);
  double worst = 0.0;
  int nets = 0;
  while (nets < 20) {
    const std::size_t layers = 1 + r.Below(3);
    NetSpec spec;
    std::size_t in = 1 + r.Below(6);
    for (std::size_t l = 0; l < layers; ++l) {
      const bool last = l + 1 == layers;
      const std::size_t out = last ? 1 : 1 + r.Below(6);
      spec.push_back(LayerSpec{in, out, last ? Activation::kSigmoid : Activation::kRelu});
      in = out;
    }
    std::size_t count = 0;
    for (const LayerSpec &ls : spec) count += ls.in_dim * ls.out_dim;
    if (count > 64) continue;
    ++nets;
    NetworkParams p = NetworkParams::Initialize(spec, r);
    for (auto &layer : p.layers) {
      for (double &b : layer.biases) b = r.Uniform(0.05, 0.3);
    }
    const std::size_t dim = spec.front().in_dim;
    std::vector<double> x(10 * dim), y(10);
    for (double &e : x) e = r.Uniform(-1, 1);
    for (double &e : y) e = r.Uniform01();
    const Batch batch{x, y, dim};
    const ParticipationView full = ParticipationView::Full(spec);
    const auto analytic = oracle::Flatten(Backward(p, full, batch));
    const auto numeric = oracle::NumericGradient(
        p, [&](const NetworkParams &q) { return MeanL1Loss(q, full, batch); }, kFdStep);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), kGradFloor});
      worst = std::max(worst, std::fabs(analytic[i] - numeric[i]) / denom);
    }
  }
  v.Require(worst < kGradRelTol, "max relative error " + FormatExact(worst));
  v.detail << "20 nets, max relative error " << worst;
}

void CriterionPruneOracle(Verdict &v) {
  Rng r(4242);
  int capacity_cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t width = 1 + r.Below(64);
    const NetSpec spec{{width, 1, Activation::kSigmoid}};
    NetworkParams p = NetworkParams::Zeros(spec);
    for (double &w : p.layers[0].weights) {
      w = trial % 2 == 0 ? r.Normal()
                         : 0.25 * static_cast<double>(r.Below(4)) * (r.Below(2) ? 1 : -1);
    }
    const double p1 = trial % 3 == 0 ? 0.1 * static_cast<double>(r.Below(10)) : r.Uniform01();
    const double p2 = trial % 3 == 0 ? 0.1 * static_cast<double>(r.Below(10)) : r.Uniform01();
    const std::vector<double> w0 = p.layers[0].weights;
    std::vector<std::size_t> all(width);
    for (std::size_t i = 0; i < width; ++i) all[i] = i;
    const std::size_t drop = oracle::Ceil(p1, width);

    MaskRegistry reg(spec, 1, 0);
    reg.BeginPresetTask(1);
    if (drop == width) {
      ++capacity_cases;
      v.Require(oracle::CodeOf([&] { reg.FirstPrune(p, 1, p1); }) == ErrorCode::kCapacity,
                "expected capacity error");
      continue;
    }
    reg.FirstPrune(p, 1, p1);
    const auto pruned = oracle::SmallestSet(w0, all, drop);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < width; ++i) {
      const bool ok = reg.current()[0][i] == (pruned[i] ? 0 : 1) &&
                      p.layers[0].weights[i] == (pruned[i] ? 0.0 : w0[i]);
      v.Require(ok, "first prune mismatch, trial " + std::to_string(trial));
      if (!pruned[i]) kept.push_back(i);
    }
    reg.SecondPrune(p, 1, p2);
    const auto bar = oracle::SmallestSet(w0, kept, oracle::Ceil(p2, kept.size()));
    for (std::size_t i : kept) {
      v.Require(reg.current()[0][i] == (bar[i] ? -1 : 1),
                "second prune mismatch, trial " + std::to_string(trial));
    }
  }
  v.detail << "200 layers (" << capacity_cases << " at full release)";
}

void CriterionDeterminism(Verdict &v) {
  const fs::path root = fs::temp_directory_path() / "silf_acceptance_det";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg = (root / "default.json").string();
  WriteFile(cfg, DefaultConfigJson());
  CmdRun(RunOptions{cfg, (root / "a").string(), std::nullopt, std::nullopt});
  CmdRun(RunOptions{cfg, (root / "b").string(), std::nullopt, std::nullopt});
  for (const char *name : {"checkpoint.silf", "score_matrix.csv"}) {
    v.Require(ReadFile((root / "a" / name).string()) == ReadFile((root / "b" / name).string()),
              std::string(name) + " differs");
  }
  v.detail << "checkpoint " << fs::file_size(root / "a" / "checkpoint.silf") << " bytes";
  fs::remove_all(root);
}

void CriterionNoRelevanceEquivalence(Verdict &v) {
  SequenceConfig cfg = DefaultSequence(3, 3);
  std::vector<SyntheticTaskSpec> specs(6);
  const double angles[6] = {0, 10, 20, 15, 25, 5};
  for (std::size_t i = 0; i < 6; ++i) {
    specs[i].seed = DeriveSeed(cfg.seed, "task/" + std::to_string(i + 1));
    specs[i].reference = i == 0 ? 0 : 1;
    specs[i].relevance_angle = angles[i];
  }
  const std::vector<Dataset> data = TaskSuite(specs).GenerateAll();
  const SequenceResult silf = RunSequence(cfg, data);
  double lowest = 1.0;
  for (const RelevanceReport &rep : silf.relevance) {
    for (const RelevanceRow &row : rep.rows) lowest = std::min(lowest, row.srcc);
  }
  v.Require(lowest >= 0.0, "suite has a negative pair, SRCC " + FormatExact(lowest));
  SequenceConfig zero = cfg;
  zero.lambda = 0.0;
  const SequenceResult norr = RunSequence(zero, data);
  v.Require(EncodeCheckpoint(silf.checkpoint).bytes == EncodeCheckpoint(norr.checkpoint).bytes,
            "checkpoints differ");
  v.detail << "lowest SRCC " << FormatScore(lowest);
}

}  // namespace

int main() {
  Report(1, "zero preset-stage forgetting", CriterionZeroForgetting);
  Report(2, "scalable reclamation", CriterionReclamation);
  Report(3, "forgetting contrast against NO-RL", CriterionForgettingContrast);
  Report(4, "relevance branch coverage", CriterionRelevanceBranches);
  Report(5, "metric fixtures", CriterionMetricFixtures);
  Report(6, "SRCC oracle", CriterionSrccOracle);
  Report(7, "gradient check", CriterionGradient);
  Report(8, "pruning oracle", CriterionPruneOracle);
  Report(9, "determinism", CriterionDeterminism);
  Report(10, "NO-RR equivalence", CriterionNoRelevanceEquivalence);
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures;
}
