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

#ifndef SILF_NEURALCORE_HPP_
#define SILF_NEURALCORE_HPP_

// Dense feed-forward regressor with hand-written backprop, mean L1 loss, a
// sigmoid head and SGD restricted by per-weight participation masks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace silf {

class Rng;

enum class Activation { kRelu, kSigmoid, kIdentity };

const char *ActivationName(Activation act);
Activation ParseActivation(const std::string &name);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kRelu;

  bool operator==(const LayerSpec &) const = default;
};

using NetSpec = std::vector<LayerSpec>;

// Shape checks plus the regressor contract: last layer is 1-wide sigmoid.
void ValidateNetSpec(const NetSpec &spec);

struct DenseLayer {
  LayerSpec spec;
  std::vector<double> weights;  // out_dim x in_dim, row-major
  std::vector<double> biases;   // out_dim

  std::size_t WeightCount() const { return weights.size(); }
  bool operator==(const DenseLayer &) const = default;
};

struct NetworkParams {
  std::vector<DenseLayer> layers;

  static NetworkParams Zeros(const NetSpec &spec);
  // He-uniform for relu layers, Xavier-uniform otherwise; zero biases.
  static NetworkParams Initialize(const NetSpec &spec, Rng &rng);

  NetSpec Spec() const;
  std::size_t InputDim() const;
  std::size_t WeightCount() const;
  bool AllFinite() const;

  bool operator==(const NetworkParams &) const = default;
};

using Gradients = NetworkParams;

// One vector per layer.
using BiasSet = std::vector<std::vector<double>>;

BiasSet ExtractBiases(const NetworkParams &params);
void ApplyBiases(NetworkParams &params, const BiasSet &biases);
BiasSet ZeroBiases(const NetSpec &spec);

// A per-layer boolean over weights.
using LayerBitmap = std::vector<std::uint8_t>;
using Bitmap = std::vector<LayerBitmap>;

Bitmap EmptyBitmap(const NetSpec &spec);
Bitmap FullBitmap(const NetSpec &spec);
std::size_t CountSet(const Bitmap &bitmap);

// forward: weight takes part in forward/backward (else it is treated as 0).
// trainable: weight receives SGD updates. trainable must be a subset of
// forward.
struct ParticipationView {
  Bitmap forward;
  Bitmap trainable;
  bool train_biases = false;

  static ParticipationView Full(const NetSpec &spec);
  static ParticipationView Inference(Bitmap forward);
};

void ValidateView(const NetworkParams &params, const ParticipationView &view);

// Row-major sample matrix with one target per row.
struct Batch {
  std::span<const double> inputs;
  std::span<const double> targets;
  std::size_t dim = 0;

  std::size_t size() const { return targets.size(); }
  std::span<const double> Row(std::size_t i) const {
    return inputs.subspan(i * dim, dim);
  }
};

double Forward(const NetworkParams &params, const ParticipationView &view,
               std::span<const double> x);

std::vector<double> Predict(const NetworkParams &params,
                            const ParticipationView &view,
                            std::span<const double> inputs, std::size_t dim);

double MeanL1Loss(const NetworkParams &params, const ParticipationView &view,
                  const Batch &batch);

// Gradient of the mean L1 loss over the batch. Residual 0 contributes 0.
Gradients Backward(const NetworkParams &params, const ParticipationView &view,
                   const Batch &batch);

struct OptimizerState {
  double base_lr = 1e-3;
  double decay_factor = 0.5;
  int decay_every = 10;
  int current_epoch = 0;

  double EffectiveLr() const;
  void Validate() const;
};

void SgdStep(NetworkParams &params, const Gradients &grads,
             const ParticipationView &view, double lr);

struct TrainOptions {
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// Runs `epochs` epochs of shuffled mini-batch SGD and advances
// opt.current_epoch. The shuffle for each epoch is drawn from the stream
// "epoch/<current_epoch>" of options.seed. Returns the full-data mean L1 loss
// measured after each epoch.
std::vector<double> TrainEpochs(NetworkParams &params,
                                const ParticipationView &view,
                                const Batch &data, OptimizerState &opt,
                                int epochs, const TrainOptions &options);

}  // namespace silf

#endif  // SILF_NEURALCORE_HPP_
