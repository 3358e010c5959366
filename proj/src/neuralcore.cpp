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

#include "silf/neuralcore.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "silf/error.hpp"
#include "silf/rng.hpp"

namespace silf {

namespace {

double Activate(Activation act, double z) {
  switch (act) {
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kIdentity: return z;
  }
  return z;
}

// Derivative expressed through the pre-activation z and output a.
double ActivateGrad(Activation act, double z, double a) {
  switch (act) {
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid: return a * (1.0 - a);
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

// Activations of every layer for one sample; acts[0] is the input.
struct Trace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> acts;
};

void RunForward(const NetworkParams &params, const ParticipationView &view,
                std::span<const double> x, Trace &trace) {
  const std::size_t depth = params.layers.size();
  trace.pre.resize(depth);
  trace.acts.resize(depth + 1);
  trace.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < depth; ++l) {
    const DenseLayer &layer = params.layers[l];
    const LayerBitmap &mask = view.forward[l];
    const std::size_t in = layer.spec.in_dim;
    const std::size_t out = layer.spec.out_dim;
    const std::vector<double> &a = trace.acts[l];
    std::vector<double> &z = trace.pre[l];
    std::vector<double> &next = trace.acts[l + 1];
    z.assign(out, 0.0);
    next.assign(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = 0.0;
      const double *w = layer.weights.data() + j * in;
      const std::uint8_t *m = mask.data() + j * in;
      for (std::size_t i = 0; i < in; ++i) {
        if (m[i]) acc += w[i] * a[i];
      }
      z[j] = acc + layer.biases[j];
      next[j] = Activate(layer.spec.activation, z[j]);
    }
  }
}

void CheckInput(const NetworkParams &params, std::size_t len) {
  if (params.layers.empty()) Fail(ErrorCode::kShape, "network has no layers");
  if (len != params.InputDim()) {
    std::ostringstream os;
    os << "input length " << len << " != network input dim "
       << params.InputDim();
    Fail(ErrorCode::kShape, os.str());
  }
}

}  // namespace

const char *ActivationName(Activation act) {
  switch (act) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation ParseActivation(const std::string &name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "identity") return Activation::kIdentity;
  Fail(ErrorCode::kArgument, "unknown activation '" + name + "'");
}

void ValidateNetSpec(const NetSpec &spec) {
  if (spec.empty()) Fail(ErrorCode::kShape, "network spec has no layers");
  for (std::size_t l = 0; l < spec.size(); ++l) {
    if (spec[l].in_dim < 1 || spec[l].out_dim < 1) {
      Fail(ErrorCode::kShape,
           "layer " + std::to_string(l) + " has a zero dimension");
    }
    if (l > 0 && spec[l].in_dim != spec[l - 1].out_dim) {
      Fail(ErrorCode::kShape, "layer " + std::to_string(l) +
                                  " in_dim does not match previous out_dim");
    }
  }
  const LayerSpec &head = spec.back();
  if (head.out_dim != 1 || head.activation != Activation::kSigmoid) {
    Fail(ErrorCode::kShape, "output layer must be 1-wide sigmoid");
  }
}

NetworkParams NetworkParams::Zeros(const NetSpec &spec) {
  NetworkParams p;
  p.layers.reserve(spec.size());
  for (const LayerSpec &ls : spec) {
    p.layers.push_back(DenseLayer{ls, std::vector<double>(ls.in_dim * ls.out_dim),
                                  std::vector<double>(ls.out_dim)});
  }
  return p;
}

NetworkParams NetworkParams::Initialize(const NetSpec &spec, Rng &rng) {
  NetworkParams p = Zeros(spec);
  for (DenseLayer &layer : p.layers) {
    const double fan_in = static_cast<double>(layer.spec.in_dim);
    const double fan_out = static_cast<double>(layer.spec.out_dim);
    const double limit = layer.spec.activation == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    for (double &w : layer.weights) w = rng.Uniform(-limit, limit);
  }
  return p;
}

NetSpec NetworkParams::Spec() const {
  NetSpec spec;
  for (const DenseLayer &layer : layers) spec.push_back(layer.spec);
  return spec;
}

std::size_t NetworkParams::InputDim() const {
  return layers.empty() ? 0 : layers.front().spec.in_dim;
}

std::size_t NetworkParams::WeightCount() const {
  std::size_t n = 0;
  for (const DenseLayer &layer : layers) n += layer.weights.size();
  return n;
}

bool NetworkParams::AllFinite() const {
  for (const DenseLayer &layer : layers) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

BiasSet ExtractBiases(const NetworkParams &params) {
  BiasSet out;
  for (const DenseLayer &layer : params.layers) out.push_back(layer.biases);
  return out;
}

void ApplyBiases(NetworkParams &params, const BiasSet &biases) {
  if (biases.size() != params.layers.size()) {
    Fail(ErrorCode::kShape, "bias set layer count mismatch");
  }
  for (std::size_t l = 0; l < biases.size(); ++l) {
    if (biases[l].size() != params.layers[l].biases.size()) {
      Fail(ErrorCode::kShape, "bias set width mismatch at layer " +
                                  std::to_string(l));
    }
    params.layers[l].biases = biases[l];
  }
}

BiasSet ZeroBiases(const NetSpec &spec) {
  BiasSet out;
  for (const LayerSpec &ls : spec) out.emplace_back(ls.out_dim, 0.0);
  return out;
}

Bitmap EmptyBitmap(const NetSpec &spec) {
  Bitmap out;
  for (const LayerSpec &ls : spec) out.emplace_back(ls.in_dim * ls.out_dim, 0);
  return out;
}

Bitmap FullBitmap(const NetSpec &spec) {
  Bitmap out;
  for (const LayerSpec &ls : spec) out.emplace_back(ls.in_dim * ls.out_dim, 1);
  return out;
}

std::size_t CountSet(const Bitmap &bitmap) {
  std::size_t n = 0;
  for (const LayerBitmap &layer : bitmap) {
    for (std::uint8_t b : layer) n += b ? 1 : 0;
  }
  return n;
}

ParticipationView ParticipationView::Full(const NetSpec &spec) {
  return ParticipationView{FullBitmap(spec), FullBitmap(spec), true};
}

ParticipationView ParticipationView::Inference(Bitmap forward) {
  ParticipationView view;
  view.trainable.reserve(forward.size());
  for (const LayerBitmap &layer : forward) {
    view.trainable.emplace_back(layer.size(), 0);
  }
  view.forward = std::move(forward);
  return view;
}

void ValidateView(const NetworkParams &params, const ParticipationView &view) {
  const std::size_t depth = params.layers.size();
  if (view.forward.size() != depth || view.trainable.size() != depth) {
    Fail(ErrorCode::kShape, "participation view layer count mismatch");
  }
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t n = params.layers[l].weights.size();
    if (view.forward[l].size() != n || view.trainable[l].size() != n) {
      Fail(ErrorCode::kShape,
           "participation view shape mismatch at layer " + std::to_string(l));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (view.trainable[l][i] && !view.forward[l][i]) {
        Fail(ErrorCode::kArgument, "trainable weight outside forward set at layer " +
                                       std::to_string(l) + " index " +
                                       std::to_string(i));
      }
    }
  }
}

double Forward(const NetworkParams &params, const ParticipationView &view,
               std::span<const double> x) {
  CheckInput(params, x.size());
  ValidateView(params, view);
  Trace trace;
  RunForward(params, view, x, trace);
  return trace.acts.back()[0];
}

std::vector<double> Predict(const NetworkParams &params,
                            const ParticipationView &view,
                            std::span<const double> inputs, std::size_t dim) {
  CheckInput(params, dim);
  ValidateView(params, view);
  if (inputs.size() % dim != 0) {
    Fail(ErrorCode::kShape, "input matrix size is not a multiple of dim");
  }
  const std::size_t rows = inputs.size() / dim;
  std::vector<double> out(rows);
  Trace trace;
  for (std::size_t r = 0; r < rows; ++r) {
    RunForward(params, view, inputs.subspan(r * dim, dim), trace);
    out[r] = trace.acts.back()[0];
  }
  return out;
}

double MeanL1Loss(const NetworkParams &params, const ParticipationView &view,
                  const Batch &batch) {
  if (batch.size() == 0) Fail(ErrorCode::kArgument, "empty batch");
  std::vector<double> pred = Predict(params, view, batch.inputs, batch.dim);
  if (pred.size() != batch.size()) {
    Fail(ErrorCode::kShape, "batch inputs and targets disagree in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total += std::abs(pred[i] - batch.targets[i]);
  }
  return total / static_cast<double>(pred.size());
}

Gradients Backward(const NetworkParams &params, const ParticipationView &view,
                   const Batch &batch) {
  if (batch.size() == 0) Fail(ErrorCode::kArgument, "empty batch");
  CheckInput(params, batch.dim);
  ValidateView(params, view);
  if (batch.inputs.size() != batch.size() * batch.dim) {
    Fail(ErrorCode::kShape, "batch inputs and targets disagree in length");
  }

  Gradients grads = NetworkParams::Zeros(params.Spec());
  const std::size_t depth = params.layers.size();
  const double scale = 1.0 / static_cast<double>(batch.size());
  Trace trace;
  std::vector<double> delta;
  std::vector<double> prev_delta;

  for (std::size_t s = 0; s < batch.size(); ++s) {
    RunForward(params, view, batch.Row(s), trace);
    const double residual = trace.acts.back()[0] - batch.targets[s];
    if (residual == 0.0) continue;
    const double dloss = (residual > 0.0 ? 1.0 : -1.0) * scale;

    const DenseLayer &head = params.layers.back();
    delta.assign(1, dloss * ActivateGrad(head.spec.activation,
                                         trace.pre.back()[0],
                                         trace.acts.back()[0]));
    for (std::size_t l = depth; l-- > 0;) {
      const DenseLayer &layer = params.layers[l];
      DenseLayer &g = grads.layers[l];
      const LayerBitmap &mask = view.forward[l];
      const std::size_t in = layer.spec.in_dim;
      const std::size_t out = layer.spec.out_dim;
      const std::vector<double> &a = trace.acts[l];
      for (std::size_t j = 0; j < out; ++j) {
        g.biases[j] += delta[j];
        for (std::size_t i = 0; i < in; ++i) {
          if (mask[j * in + i]) g.weights[j * in + i] += delta[j] * a[i];
        }
      }
      if (l == 0) break;
      const DenseLayer &below = params.layers[l - 1];
      prev_delta.assign(in, 0.0);
      for (std::size_t j = 0; j < out; ++j) {
        for (std::size_t i = 0; i < in; ++i) {
          if (mask[j * in + i]) {
            prev_delta[i] += layer.weights[j * in + i] * delta[j];
          }
        }
      }
      for (std::size_t i = 0; i < in; ++i) {
        prev_delta[i] *= ActivateGrad(below.spec.activation, trace.pre[l - 1][i],
                                      trace.acts[l][i]);
      }
      delta.swap(prev_delta);
    }
  }
  return grads;
}

double OptimizerState::EffectiveLr() const {
  const int steps = current_epoch / decay_every;
  return base_lr * std::pow(decay_factor, steps);
}

void OptimizerState::Validate() const {
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
    Fail(ErrorCode::kArgument, "base_lr must be positive");
  }
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    Fail(ErrorCode::kArgument, "decay_factor must lie in (0, 1]");
  }
  if (decay_every < 1) Fail(ErrorCode::kArgument, "decay_every must be >= 1");
  if (current_epoch < 0) {
    Fail(ErrorCode::kArgument, "current_epoch must be >= 0");
  }
}

void SgdStep(NetworkParams &params, const Gradients &grads,
             const ParticipationView &view, double lr) {
  ValidateView(params, view);
  if (grads.Spec() != params.Spec()) {
    Fail(ErrorCode::kShape, "gradient shape does not match params");
  }
  if (lr == 0.0) return;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    DenseLayer &layer = params.layers[l];
    const DenseLayer &g = grads.layers[l];
    const LayerBitmap &train = view.trainable[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      if (train[i]) layer.weights[i] -= lr * g.weights[i];
    }
    if (view.train_biases) {
      for (std::size_t j = 0; j < layer.biases.size(); ++j) {
        layer.biases[j] -= lr * g.biases[j];
      }
    }
  }
}

std::vector<double> TrainEpochs(NetworkParams &params,
                                const ParticipationView &view,
                                const Batch &data, OptimizerState &opt,
                                int epochs, const TrainOptions &options) {
  if (epochs < 1) Fail(ErrorCode::kArgument, "epochs must be >= 1");
  if (options.batch_size < 1) Fail(ErrorCode::kArgument, "batch_size must be >= 1");
  if (data.size() == 0) Fail(ErrorCode::kArgument, "empty training set");
  opt.Validate();
  CheckInput(params, data.dim);
  ValidateView(params, view);

  const std::size_t rows = data.size();
  const std::size_t dim = data.dim;
  std::vector<std::size_t> order(rows);
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(epochs));

  for (int e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(options.seed, "epoch/" + std::to_string(opt.current_epoch));
    rng.Shuffle(std::span<std::size_t>(order));
    const double lr = opt.EffectiveLr();
    for (std::size_t start = 0; start < rows; start += options.batch_size) {
      const std::size_t end = std::min(rows, start + options.batch_size);
      xs.clear();
      ys.clear();
      for (std::size_t k = start; k < end; ++k) {
        auto row = data.Row(order[k]);
        xs.insert(xs.end(), row.begin(), row.end());
        ys.push_back(data.targets[order[k]]);
      }
      Batch mini{xs, ys, dim};
      SgdStep(params, Backward(params, view, mini), view, lr);
    }
    ++opt.current_epoch;
    losses.push_back(MeanL1Loss(params, view, data));
  }
  if (!params.AllFinite()) {
    Fail(ErrorCode::kState, "non-finite parameter after training");
  }
  return losses;
}

}  // namespace silf
