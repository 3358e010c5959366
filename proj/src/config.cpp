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

#include "silf/config.hpp"

#include <set>

#include "json.hpp"
#include "silf/error.hpp"
#include "silf/rng.hpp"

namespace silf {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr double kDefaultLearningRate = 0.05;

[[noreturn]] void Invalid(const std::string &msg) { Fail(ErrorCode::kValidation, msg); }

const Json *Section(const Json &root, const char *name, std::set<std::string> allowed) {
  if (!root.contains(name)) return nullptr;
  const Json &sec = root.at(name);
  if (!sec.is_object()) Invalid(std::string(name) + " must be an object");
  for (const auto &[key, value] : sec.items()) {
    if (!allowed.count(key)) Invalid("unknown key " + std::string(name) + "." + key);
  }
  return &sec;
}

template <typename T>
T Get(const Json *sec, const char *section, const char *key, T fallback) {
  if (sec == nullptr || !sec->contains(key)) return fallback;
  const Json &v = sec->at(key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw std::runtime_error("not a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw std::runtime_error("not an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() || v.get<long long>() >= 0) return v.get<T>();
        throw std::runtime_error("negative");
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::runtime_error("not a string");
    }
    return v.get<T>();
  } catch (const std::exception &e) {
    Invalid(std::string(section) + "." + key + ": " + e.what());
  }
}

std::vector<double> GetRatios(const Json *sec, const char *key, std::vector<double> fallback) {
  if (sec == nullptr || !sec->contains(key)) return fallback;
  const Json &v = sec->at(key);
  if (!v.is_array()) Invalid(std::string("sequence.") + key + " must be an array");
  std::vector<double> out;
  for (const Json &x : v) {
    if (!x.is_number()) Invalid(std::string("sequence.") + key + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

RunConfig ParseRunConfig(const std::string &json_text,
                         std::optional<std::uint64_t> seed_override) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const std::exception &e) {
    Invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) Invalid("config must be a JSON object");
  for (const auto &[key, value] : root.items()) {
    if (key != "net" && key != "sequence" && key != "optimizer" && key != "tasks") {
      Invalid("unknown top-level key " + key);
    }
  }

  const Json *net = Section(root, "net", {"hidden", "activation"});
  const Json *seq = Section(root, "sequence",
                            {"n", "k", "first_ratios", "second_ratios", "lambda",
                             "epochs_initial", "epochs_cycle", "cycles", "epochs_additional",
                             "reclaim_policy", "seed", "probe_count", "trials"});
  const Json *opt = Section(root, "optimizer",
                            {"base_lr", "decay_factor", "decay_every", "batch_size"});
  const Json *tasks = Section(root, "tasks",
                              {"suite", "input_dim", "sample_count", "train_fraction", "specs"});

  RunConfig rc;
  SequenceConfig &sc = rc.sequence;
  sc.preset_tasks = Get<int>(seq, "sequence", "n", 3);
  sc.additional_tasks = Get<int>(seq, "sequence", "k", 3);
  if (sc.preset_tasks < 1) Invalid("n must be >= 1");
  if (sc.additional_tasks < 0) Invalid("k must be >= 0");
  if (sc.additional_tasks > sc.preset_tasks) {
    Invalid("k <= n violated (n=" + std::to_string(sc.preset_tasks) +
            ", k=" + std::to_string(sc.additional_tasks) + ")");
  }
  const bool three_presets = sc.preset_tasks == 3;
  sc.first_ratios = GetRatios(seq, "first_ratios",
                              three_presets ? std::vector<double>{0.7, 0.5, 0.0}
                                           : std::vector<double>{});
  sc.second_ratios = GetRatios(seq, "second_ratios",
                               three_presets ? std::vector<double>{0.4, 0.4, 0.4}
                                            : std::vector<double>{});
  sc.lambda = Get<double>(seq, "sequence", "lambda", 0.5);
  sc.epochs_initial = Get<int>(seq, "sequence", "epochs_initial", 20);
  sc.epochs_cycle = Get<int>(seq, "sequence", "epochs_cycle", 5);
  sc.cycles = Get<int>(seq, "sequence", "cycles", 2);
  sc.epochs_additional = Get<int>(seq, "sequence", "epochs_additional", 40);
  sc.reclaim_policy = ParseReclaimPolicy(
      Get<std::string>(seq, "sequence", "reclaim_policy", "reinit"));
  sc.seed = seed_override.value_or(Get<std::uint64_t>(seq, "sequence", "seed", 0));
  sc.probe_count = Get<std::size_t>(seq, "sequence", "probe_count", 64);
  rc.trials = Get<std::size_t>(seq, "sequence", "trials", 1);
  if (rc.trials < 1) Invalid("sequence.trials must be >= 1");

  sc.optimizer.base_lr = Get<double>(opt, "optimizer", "base_lr", kDefaultLearningRate);
  sc.optimizer.decay_factor = Get<double>(opt, "optimizer", "decay_factor", 0.5);
  sc.optimizer.decay_every = Get<int>(opt, "optimizer", "decay_every", 10);
  sc.batch_size = Get<std::size_t>(opt, "optimizer", "batch_size", 32);

  // tasks
  const std::size_t input_dim = Get<std::size_t>(tasks, "tasks", "input_dim", 8);
  const std::size_t samples = Get<std::size_t>(tasks, "tasks", "sample_count", 2000);
  const double train_fraction = Get<double>(tasks, "tasks", "train_fraction", 0.8);
  const std::size_t want = static_cast<std::size_t>(sc.total_tasks());
  std::vector<SyntheticTaskSpec> specs;
  if (tasks != nullptr && tasks->contains("specs")) {
    if (tasks->contains("suite")) Invalid("tasks.suite and tasks.specs are exclusive");
    const Json &list = tasks->at("specs");
    if (!list.is_array()) Invalid("tasks.specs must be an array");
    std::size_t i = 0;
    for (const Json &item : list) {
      ++i;
      const std::string where = "tasks.specs[" + std::to_string(i) + "]";
      if (!item.is_object()) Invalid(where + " must be an object");
      for (const auto &[key, value] : item.items()) {
        static const std::set<std::string> keys = {"generator", "relevance_angle", "reference",
                                                   "base", "noise_sigma", "seed", "sample_count"};
        if (!keys.count(key)) Invalid("unknown key " + where + "." + key);
      }
      SyntheticTaskSpec s;
      s.input_dim = input_dim;
      s.train_fraction = train_fraction;
      try {
        s.generator = ParseGenerator(Get<std::string>(&item, where.c_str(), "generator",
                                                      "linear-sigmoid"));
      } catch (const Error &e) {
        Invalid(where + ": " + e.what());
      }
      s.relevance_angle = Get<double>(&item, where.c_str(), "relevance_angle", 0.0);
      s.reference = Get<int>(&item, where.c_str(), "reference", 0);
      s.base = Get<int>(&item, where.c_str(), "base", 0);
      s.noise_sigma = Get<double>(&item, where.c_str(), "noise_sigma", 0.0);
      s.sample_count = Get<std::size_t>(&item, where.c_str(), "sample_count", samples);
      s.seed = item.contains("seed") && !seed_override
                   ? Get<std::uint64_t>(&item, where.c_str(), "seed", 0)
                   : DeriveSeed(sc.seed, "task/" + std::to_string(i));
      specs.push_back(s);
    }
  } else {
    const std::string suite = Get<std::string>(tasks, "tasks", "suite", "default");
    if (suite != "default") Invalid("tasks.suite must be \"default\"");
    if (want > 6) Invalid("the default suite provides six tasks; list tasks.specs instead");
    specs = TaskSuite::Default(sc.seed, want).specs();
    for (SyntheticTaskSpec &s : specs) {
      s.input_dim = input_dim;
      s.sample_count = samples;
      s.train_fraction = train_fraction;
    }
  }
  if (specs.size() != want) {
    Invalid("tasks: expected n + k = " + std::to_string(want) + " task specs, got " +
            std::to_string(specs.size()));
  }
  try {
    rc.suite = TaskSuite(specs);
  } catch (const Error &e) {
    Invalid(std::string("tasks: ") + e.what());
  }

  // net
  std::vector<std::size_t> hidden{32, 16};
  if (net != nullptr && net->contains("hidden")) {
    const Json &h = net->at("hidden");
    if (!h.is_array()) Invalid("net.hidden must be an array");
    hidden.clear();
    for (const Json &x : h) {
      if (!x.is_number_integer() || x.get<long long>() < 1) {
        Invalid("net.hidden entries must be positive integers");
      }
      hidden.push_back(x.get<std::size_t>());
    }
  }
  Activation act = Activation::kRelu;
  try {
    act = ParseActivation(Get<std::string>(net, "net", "activation", "relu"));
  } catch (const Error &e) {
    Invalid(std::string("net.activation: ") + e.what());
  }
  std::size_t in = input_dim;
  for (std::size_t width : hidden) {
    sc.net.push_back(LayerSpec{in, width, act});
    in = width;
  }
  sc.net.push_back(LayerSpec{in, 1, Activation::kSigmoid});

  rc.warnings = sc.Validate();
  return rc;
}

std::string CanonicalConfigJson(const RunConfig &config) {
  const SequenceConfig &sc = config.sequence;
  OrderedJson root;
  OrderedJson hidden = OrderedJson::array();
  for (std::size_t l = 0; l + 1 < sc.net.size(); ++l) hidden.push_back(sc.net[l].out_dim);
  root["net"] = {{"hidden", hidden},
                 {"activation", sc.net.size() > 1 ? ActivationName(sc.net[0].activation)
                                                  : "relu"}};
  root["sequence"] = {{"n", sc.preset_tasks},
                      {"k", sc.additional_tasks},
                      {"first_ratios", sc.first_ratios},
                      {"second_ratios", sc.second_ratios},
                      {"lambda", sc.lambda},
                      {"epochs_initial", sc.epochs_initial},
                      {"epochs_cycle", sc.epochs_cycle},
                      {"cycles", sc.cycles},
                      {"epochs_additional", sc.epochs_additional},
                      {"reclaim_policy", ReclaimPolicyName(sc.reclaim_policy)},
                      {"seed", sc.seed},
                      {"probe_count", sc.probe_count},
                      {"trials", config.trials}};
  root["optimizer"] = {{"base_lr", sc.optimizer.base_lr},
                       {"decay_factor", sc.optimizer.decay_factor},
                       {"decay_every", sc.optimizer.decay_every},
                       {"batch_size", sc.batch_size}};
  OrderedJson specs = OrderedJson::array();
  const auto &all = config.suite.specs();
  for (const SyntheticTaskSpec &s : all) {
    OrderedJson item = {{"generator", GeneratorName(s.generator)},
                        {"relevance_angle", s.relevance_angle},
                        {"reference", s.reference},
                        {"base", s.base},
                        {"noise_sigma", s.noise_sigma},
                        {"seed", s.seed},
                        {"sample_count", s.sample_count}};
    specs.push_back(item);
  }
  root["tasks"] = {{"input_dim", all.empty() ? 0 : all.front().input_dim},
                   {"train_fraction", all.empty() ? 0.8 : all.front().train_fraction},
                   {"specs", specs}};
  return root.dump(2) + "\n";
}

std::string DefaultConfigJson() {
  return CanonicalConfigJson(ParseRunConfig("{}"));
}

}  // namespace silf
