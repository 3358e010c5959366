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

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "silf/neuralcore.hpp"
#include "silf/rng.hpp"

using namespace silf;

namespace {

NetSpec RandomSpec(Rng &r) {
  const std::size_t layers = 1 + r.Below(3);
  NetSpec spec;
  std::size_t in = 1 + r.Below(4);
  for (std::size_t l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    const std::size_t out = last ? 1 : 1 + r.Below(4);
    const Activation act = last ? Activation::kSigmoid
                                : (r.Below(2) ? Activation::kRelu : Activation::kIdentity);
    spec.push_back(LayerSpec{in, out, act});
    in = out;
  }
  return spec;
}

struct Data {
  std::vector<double> x, y;
  std::size_t dim;
  Batch batch() const { return Batch{x, y, dim}; }
};

Data RandomData(Rng &r, std::size_t dim, std::size_t rows) {
  Data d{{}, {}, dim};
  for (std::size_t i = 0; i < rows * dim; ++i) d.x.push_back(r.Uniform(-1, 1));
  for (std::size_t i = 0; i < rows; ++i) d.y.push_back(r.Uniform01());
  return d;
}

}  // namespace

TEST_CASE("forward of a hand-computed network") {
  NetSpec spec{{2, 1, Activation::kSigmoid}};
  NetworkParams p = NetworkParams::Zeros(spec);
  p.layers[0].weights = {1.0, 2.0};
  p.layers[0].biases = {0.5};
  const std::vector<double> x{1.0, -1.0};
  const double expect = 1.0 / (1.0 + std::exp(0.5));
  CHECK(Forward(p, ParticipationView::Full(spec), x) == doctest::Approx(expect).epsilon(1e-15));

  // Masking the second weight removes its contribution.
  ParticipationView v = ParticipationView::Full(spec);
  v.forward[0][1] = 0;
  v.trainable[0][1] = 0;
  CHECK(Forward(p, v, x) == doctest::Approx(1.0 / (1.0 + std::exp(-1.5))).epsilon(1e-15));
}

TEST_CASE("backward matches central differences on random nets") {
  Rng r(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const NetSpec spec = RandomSpec(r);
    NetworkParams p = NetworkParams::Initialize(spec, r);
    for (auto &layer : p.layers) {
      for (double &b : layer.biases) b = r.Uniform(-0.3, 0.3);
    }
    const Data d = RandomData(r, spec.front().in_dim, 7);
    const ParticipationView full = ParticipationView::Full(spec);
    const auto analytic = oracle::Flatten(Backward(p, full, d.batch()));
    const auto numeric = oracle::NumericGradient(
        p, [&](const NetworkParams &q) { return MeanL1Loss(q, full, d.batch()); });
    REQUIRE(analytic.size() == numeric.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max(1e-3, std::fabs(numeric[i]));
      CHECK(std::fabs(analytic[i] - numeric[i]) / scale < 1e-4);
    }
  }
}

TEST_CASE("masked weights get zero gradient and never move") {
  Rng r(5);
  const NetSpec spec{{3, 4, Activation::kRelu}, {4, 1, Activation::kSigmoid}};
  NetworkParams p = NetworkParams::Initialize(spec, r);
  ParticipationView v = ParticipationView::Full(spec);
  v.forward[0][2] = 0;
  v.trainable[0][2] = 0;
  v.trainable[1][1] = 0;  // visible but frozen
  v.train_biases = false;
  const Data d = RandomData(r, 3, 20);
  const Gradients g = Backward(p, v, d.batch());
  CHECK(g.layers[0].weights[2] == 0.0);

  const NetworkParams before = p;
  OptimizerState opt;
  opt.base_lr = 0.1;
  TrainEpochs(p, v, d.batch(), opt, 3, TrainOptions{4, 1});
  CHECK(p.layers[0].weights[2] == before.layers[0].weights[2]);
  CHECK(p.layers[1].weights[1] == before.layers[1].weights[1]);
  CHECK(p.layers[0].biases == before.layers[0].biases);
  CHECK(p.layers[0].weights[0] != before.layers[0].weights[0]);
  CHECK(opt.current_epoch == 3);
}

TEST_CASE("zero learning rate changes nothing") {
  Rng r(6);
  const NetSpec spec{{2, 3, Activation::kRelu}, {3, 1, Activation::kSigmoid}};
  NetworkParams p = NetworkParams::Initialize(spec, r);
  const NetworkParams before = p;
  const Data d = RandomData(r, 2, 10);
  const ParticipationView full = ParticipationView::Full(spec);
  SgdStep(p, Backward(p, full, d.batch()), full, 0.0);
  CHECK(p == before);
}

TEST_CASE("step decay schedule") {
  OptimizerState o;
  o.base_lr = 0.1;
  o.decay_factor = 0.5;
  o.decay_every = 10;
  o.current_epoch = 9;
  CHECK(o.EffectiveLr() == doctest::Approx(0.1));
  o.current_epoch = 25;
  CHECK(o.EffectiveLr() == doctest::Approx(0.025));
  o.decay_every = 0;
  CHECK(oracle::CodeOf([&] { o.Validate(); }) == ErrorCode::kArgument);
}

TEST_CASE("training is deterministic and lowers the loss") {
  Rng r(8);
  const NetSpec spec{{2, 8, Activation::kRelu}, {8, 1, Activation::kSigmoid}};
  Data d{{}, {}, 2};
  for (int i = 0; i < 200; ++i) {
    const double a = r.Uniform(-1, 1), b = r.Uniform(-1, 1);
    d.x.push_back(a);
    d.x.push_back(b);
    d.y.push_back(1.0 / (1.0 + std::exp(-3 * (a - b))));
  }
  Rng i1(1), i2(1);
  NetworkParams p1 = NetworkParams::Initialize(spec, i1), p2 = NetworkParams::Initialize(spec, i2);
  OptimizerState o1, o2;
  o1.base_lr = o2.base_lr = 0.05;
  const ParticipationView full = ParticipationView::Full(spec);
  const double start = MeanL1Loss(p1, full, d.batch());
  const auto l1 = TrainEpochs(p1, full, d.batch(), o1, 20, TrainOptions{16, 3});
  const auto l2 = TrainEpochs(p2, full, d.batch(), o2, 20, TrainOptions{16, 3});
  CHECK(p1 == p2);
  CHECK(l1 == l2);
  CHECK(l1.back() < 0.5 * start);
}

TEST_CASE("shape and view validation") {
  CHECK(oracle::CodeOf([] { ValidateNetSpec({{2, 1, Activation::kRelu}}); }) == ErrorCode::kShape);
  CHECK(oracle::CodeOf([] {
          ValidateNetSpec({{2, 3, Activation::kRelu}, {4, 1, Activation::kSigmoid}});
        }) == ErrorCode::kShape);
  const NetSpec spec{{2, 1, Activation::kSigmoid}};
  NetworkParams p = NetworkParams::Zeros(spec);
  ParticipationView v = ParticipationView::Full(spec);
  v.forward[0][0] = 0;
  CHECK(oracle::CodeOf([&] { ValidateView(p, v); }) == ErrorCode::kArgument);
  CHECK(oracle::CodeOf([] { ParseActivation("tanh"); }) == ErrorCode::kArgument);
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(oracle::CodeOf([&] { Predict(p, ParticipationView::Full(spec), x, 2); }) ==
        ErrorCode::kShape);
}

TEST_CASE("bias sets round-trip") {
  Rng r(4);
  const NetSpec spec{{2, 3, Activation::kRelu}, {3, 1, Activation::kSigmoid}};
  NetworkParams p = NetworkParams::Initialize(spec, r);
  BiasSet b{{0.1, 0.2, 0.3}, {0.4}};
  ApplyBiases(p, b);
  CHECK(ExtractBiases(p) == b);
  CHECK(ZeroBiases(spec) == BiasSet{{0, 0, 0}, {0}});
  CHECK(oracle::CodeOf([&] { ApplyBiases(p, BiasSet{{0.1}}); }) == ErrorCode::kShape);
}
