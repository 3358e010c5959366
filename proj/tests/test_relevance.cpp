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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "silf/relevance.hpp"
#include "silf/rng.hpp"

using namespace silf;

namespace {

std::vector<double> RandomVector(Rng &r, std::size_t n, bool ties) {
  std::vector<double> v(n);
  for (double &x : v) x = ties ? static_cast<double>(r.Below(4)) : r.Normal();
  return v;
}

}  // namespace

TEST_CASE("fractional ranks average ties") {
  const std::vector<double> v{10, 20, 20, 5};
  CHECK(FractionalRanks(v) == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("srcc matches the rank-then-pearson oracle") {
  Rng r(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + r.Below(48);
    const bool ties = trial % 2 == 0;
    const auto a = RandomVector(r, n, ties);
    auto b = RandomVector(r, n, ties);
    if (std::all_of(b.begin(), b.end(), [&](double x) { return x == b[0]; })) b[0] += 1;
    CHECK(std::fabs(Srcc(a, b) - oracle::Spearman(a, b)) <= 1e-12);
  }
}

TEST_CASE("srcc is invariant under strictly increasing transforms") {
  Rng r(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = RandomVector(r, 20, false);
    const auto b = RandomVector(r, 20, false);
    std::vector<double> t(a.size());
    std::transform(a.begin(), a.end(), t.begin(), [](double x) { return std::exp(x) + 3 * x; });
    CHECK(std::fabs(Srcc(a, b) - Srcc(t, b)) <= 1e-12);
  }
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{4, 3, 2, 1};
  CHECK(Srcc(x, x) == doctest::Approx(1.0));
  CHECK(Srcc(x, y) == doctest::Approx(-1.0));
}

TEST_CASE("srcc edge cases") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> flat{2, 2, 2};
  CHECK(Srcc(flat, x) == 0.0);
  CHECK(oracle::CodeOf([&] { Srcc(x, flat); }) == ErrorCode::kUndefinedCorrelation);
  const std::vector<double> one{1};
  CHECK(oracle::CodeOf([&] { Srcc(one, one); }) == ErrorCode::kUndefinedCorrelation);
  const std::vector<double> two{1, 2};
  CHECK(oracle::CodeOf([&] { Srcc(two, x); }) == ErrorCode::kUndefinedCorrelation);
  const std::vector<double> bad{1, NAN, 3};
  CHECK(oracle::CodeOf([&] { Srcc(bad, x); }) == ErrorCode::kUndefinedCorrelation);
}

TEST_CASE("reuse ratio branches") {
  CHECK(ReuseRatio(0.3, 0.5) == 1.0);
  CHECK(ReuseRatio(0.0, 0.5) == 1.0);
  CHECK(ReuseRatio(-0.6, 0.5) == doctest::Approx(0.7));
  CHECK(ReuseRatio(-1.0, 1.0) == 0.0);
  CHECK(ReuseRatio(-0.9, 0.0) == 1.0);
  CHECK(oracle::CodeOf([] { ReuseRatio(-0.5, 1.5); }) == ErrorCode::kArgument);
  CHECK(oracle::CodeOf([] { ReuseRatio(1.5, 0.5); }) == ErrorCode::kArgument);
}

namespace {

struct OneTask {
  NetSpec spec{{3, 6, Activation::kRelu}, {6, 1, Activation::kSigmoid}};
  MaskRegistry reg{spec, 2, 0};
  NetworkParams params;
  BiasSet biases;
  ReuseRecord reuse{1, {}};

  explicit OneTask(std::uint64_t seed) {
    Rng r(seed);
    params = NetworkParams::Initialize(spec, r);
    for (auto &layer : params.layers) {
      for (double &b : layer.biases) b = r.Uniform(-0.2, 0.2);
    }
    reg.BeginPresetTask(1);
    reg.FirstPrune(params, 1, 0.4);
    reg.SecondPrune(params, 1, 0.4);
    reg.Archive(1);
    biases = ExtractBiases(params);
  }
};

}  // namespace

TEST_CASE("muting takes the floor of (1 - R) owned weights with smallest magnitude") {
  OneTask f(10);
  for (double ratio : {1.0, 0.75, 0.6, 0.31, 0.0}) {
    const ReuseEntry e = MuteByMagnitude(f.reg, f.params, 1, ratio);
    const Bitmap owned = f.reg.OwnedBy(1);
    for (std::size_t l = 0; l < f.spec.size(); ++l) {
      std::vector<std::size_t> cand;
      for (std::size_t i = 0; i < owned[l].size(); ++i) {
        if (owned[l][i]) cand.push_back(i);
      }
      const std::size_t want = oracle::Floor(1.0 - ratio, cand.size());
      CHECK(e.owned_count[l] == cand.size());
      CHECK(e.muted_count[l] == want);
      const auto expect = oracle::SmallestSet(f.params.layers[l].weights, cand, want);
      for (std::size_t i = 0; i < owned[l].size(); ++i) {
        CHECK(static_cast<bool>(e.muted[l][i]) == static_cast<bool>(expect[i]));
      }
    }
  }
}

TEST_CASE("relevance pass scores earlier tasks and mutes negatively related ones") {
  OneTask f(11);
  Rng r(12);
  std::vector<double> x(300);
  for (double &v : x) v = r.Uniform(-1, 1);
  const ParticipationView view1 = f.reg.ComposeView(1, ViewMode::kMax, f.reuse);
  const std::vector<double> pred = Predict(f.params, view1, x, 3);
  // Noise on the free weights must not matter: they are outside task 1.
  NetworkParams p = f.params;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (std::size_t i = 0; i < p.layers[l].weights.size(); ++i) {
      if (f.reg.current()[l][i] == 0) p.layers[l].weights[i] = r.Uniform(-1, 1);
    }
  }
  ApplyBiases(p, ZeroBiases(f.spec));
  const std::vector<TaskModel> prev{TaskModel{&f.biases, &f.reuse}};

  std::vector<double> same = pred, reversed(pred.size());
  std::transform(pred.begin(), pred.end(), reversed.begin(), [](double v) { return 1.0 - v; });
  f.reg.BeginPresetTask(2);

  const RelevanceResult pos = RelevanceGuidedReuse(f.reg, p, prev, Batch{x, same, 3}, 2, 0.5);
  REQUIRE(pos.report.rows.size() == 1);
  CHECK(pos.report.rows[0].srcc == doctest::Approx(1.0));
  CHECK(pos.report.rows[0].reuse_ratio == 1.0);
  CHECK(pos.report.rows[0].muted_count == 0);
  CHECK(pos.record.entries.size() == 1);

  const RelevanceResult neg =
      RelevanceGuidedReuse(f.reg, p, prev, Batch{x, reversed, 3}, 2, 0.5);
  CHECK(neg.report.rows[0].srcc == doctest::Approx(-1.0));
  CHECK(neg.report.rows[0].reuse_ratio == doctest::Approx(0.5));
  std::size_t expect = 0;
  for (std::size_t c : neg.record.entries[0].owned_count) expect += oracle::Floor(0.5, c);
  CHECK(neg.report.rows[0].muted_count == expect);
  CHECK(neg.report.rows[0].owned_count == CountSet(f.reg.OwnedBy(1)));

  CHECK(oracle::CodeOf([&] {
          RelevanceGuidedReuse(f.reg, p, prev, Batch{x, same, 3}, 1, 0.5);
        }) == ErrorCode::kArgument);
}
