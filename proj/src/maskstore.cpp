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

#include "silf/maskstore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "silf/error.hpp"

namespace silf {

namespace {

constexpr double kSnap = 1e-9;

const char *StateName(TaskState s) {
  switch (s) {
    case TaskState::kUnseen: return "unseen";
    case TaskState::kTraining: return "training";
    case TaskState::kFirstPruned: return "first-pruned";
    case TaskState::kSecondPruned: return "second-pruned";
    case TaskState::kReclaimed: return "reclaimed";
    case TaskState::kArchived: return "archived";
  }
  return "?";
}

std::string TaskLabel(TaskId t) { return "task " + std::to_string(t); }

void CheckRatio(double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    std::ostringstream os;
    os << "pruning ratio " << ratio << " outside [0, 1)";
    Fail(ErrorCode::kArgument, os.str());
  }
}

}  // namespace

const char *ViewModeName(ViewMode mode) {
  return mode == ViewMode::kMax ? "max" : "min";
}

const ReuseEntry *ReuseRecord::Find(TaskId prev) const {
  for (const ReuseEntry &e : entries) {
    if (e.prev_task == prev) return &e;
  }
  return nullptr;
}

std::size_t CeilCount(double ratio, std::size_t count) {
  const double x = ratio * static_cast<double>(count);
  const double r = std::round(x);
  if (std::abs(x - r) < kSnap) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

std::size_t FloorCount(double ratio, std::size_t count) {
  const double x = ratio * static_cast<double>(count);
  const double r = std::round(x);
  if (std::abs(x - r) < kSnap) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(x));
}

std::vector<std::size_t> SmallestByMagnitude(const std::vector<double> &values,
                                             const std::vector<std::size_t> &candidates,
                                             std::size_t take) {
  std::vector<std::size_t> order = candidates;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma < mb;
    return a < b;
  });
  order.resize(std::min(take, order.size()));
  return order;
}

MaskRegistry::MaskRegistry(const NetSpec &spec, int preset_count,
                           int additional_count) {
  ValidateNetSpec(spec);
  if (preset_count < 1) Fail(ErrorCode::kArgument, "preset task count must be >= 1");
  if (additional_count < 0 || additional_count > preset_count) {
    Fail(ErrorCode::kArgument, "additional task count must lie in [0, n]");
  }
  state_.spec = spec;
  state_.preset_count = preset_count;
  state_.additional_count = additional_count;
  for (const LayerSpec &ls : spec) {
    state_.current.emplace_back(ls.in_dim * ls.out_dim, MaskLabel{0});
  }
  state_.task_states.assign(static_cast<std::size_t>(preset_count + additional_count),
                            TaskState::kUnseen);
}

MaskRegistry::MaskRegistry(RegistryState state) : state_(std::move(state)) {
  ValidateNetSpec(state_.spec);
  if (state_.current.size() != state_.spec.size()) {
    Fail(ErrorCode::kShape, "registry layer count does not match spec");
  }
  if (state_.task_states.size() !=
      static_cast<std::size_t>(state_.preset_count + state_.additional_count)) {
    Fail(ErrorCode::kShape, "registry task table has the wrong size");
  }
}

void MaskRegistry::RequireTask(TaskId t) const {
  if (t < 1 || t > max_task()) {
    Fail(ErrorCode::kArgument, "unknown " + TaskLabel(t));
  }
}

TaskState MaskRegistry::StateOf(TaskId t) const {
  RequireTask(t);
  return state_.task_states[t - 1];
}

TaskId MaskRegistry::LastTask() const {
  TaskId last = 0;
  for (TaskId t = 1; t <= max_task(); ++t) {
    if (state_.task_states[t - 1] != TaskState::kUnseen) last = t;
  }
  return last;
}

void MaskRegistry::BeginPresetTask(TaskId t) {
  RequireTask(t);
  if (!IsPreset(t)) {
    Fail(ErrorCode::kState, TaskLabel(t) + " is additional; it starts via reclaim");
  }
  if (StateOf(t) != TaskState::kUnseen) {
    Fail(ErrorCode::kState, TaskLabel(t) + " already started");
  }
  if (t > 1 && StateOf(t - 1) != TaskState::kArchived) {
    Fail(ErrorCode::kState, TaskLabel(t - 1) + " must be archived first");
  }
  SetState(t, TaskState::kTraining);
}

PruneOutcome MaskRegistry::FirstPrune(NetworkParams &params, TaskId t,
                                      double ratio) {
  RequireTask(t);
  CheckRatio(ratio);
  if (StateOf(t) != TaskState::kTraining) {
    Fail(ErrorCode::kState, "first prune of " + TaskLabel(t) + " in state " +
                                StateName(StateOf(t)));
  }
  if (params.Spec() != state_.spec) Fail(ErrorCode::kShape, "params do not match registry");

  // Validate every layer before touching anything.
  std::vector<std::vector<std::size_t>> candidates(state_.current.size());
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    const LayerMask &labels = state_.current[l];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == 0) candidates[l].push_back(i);
    }
    const std::size_t c = candidates[l].size();
    if (c == 0 || c - CeilCount(ratio, c) == 0) {
      std::ostringstream os;
      os << "layer " << l << " has " << c << " free weights; ratio " << ratio
         << " leaves none for " << TaskLabel(t);
      Fail(ErrorCode::kCapacity, os.str());
    }
  }

  PruneOutcome out;
  const MaskLabel label = static_cast<MaskLabel>(t);
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    LayerMask &labels = state_.current[l];
    std::vector<double> &w = params.layers[l].weights;
    const std::size_t c = candidates[l].size();
    const std::size_t drop = CeilCount(ratio, c);
    std::vector<std::size_t> pruned = SmallestByMagnitude(w, candidates[l], drop);
    double threshold = 0.0;
    for (std::size_t i : pruned) threshold = std::max(threshold, std::abs(w[i]));
    for (std::size_t i : candidates[l]) labels[i] = label;
    for (std::size_t i : pruned) {
      labels[i] = 0;
      w[i] = 0.0;
    }
    out.kept_count.push_back(c - drop);
    out.pruned_count.push_back(drop);
    out.threshold.push_back(threshold);
  }
  state_.archived_first[t] = state_.current;
  SetState(t, TaskState::kFirstPruned);
  return out;
}

PruneOutcome MaskRegistry::SecondPrune(const NetworkParams &params, TaskId t,
                                       double ratio) {
  RequireTask(t);
  CheckRatio(ratio);
  if (StateOf(t) != TaskState::kFirstPruned) {
    Fail(ErrorCode::kState, "second prune of " + TaskLabel(t) + " in state " +
                                StateName(StateOf(t)));
  }
  if (params.Spec() != state_.spec) Fail(ErrorCode::kShape, "params do not match registry");

  const MaskLabel label = static_cast<MaskLabel>(t);
  std::vector<std::vector<std::size_t>> candidates(state_.current.size());
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    const LayerMask &labels = state_.current[l];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) candidates[l].push_back(i);
    }
    if (candidates[l].empty()) {
      Fail(ErrorCode::kCapacity, TaskLabel(t) + " owns no weights in layer " +
                                     std::to_string(l));
    }
  }

  PruneOutcome out;
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    LayerMask &labels = state_.current[l];
    const std::vector<double> &w = params.layers[l].weights;
    const std::size_t c = candidates[l].size();
    const std::size_t drop = CeilCount(ratio, c);
    std::vector<std::size_t> relabel = SmallestByMagnitude(w, candidates[l], drop);
    double threshold = 0.0;
    for (std::size_t i : relabel) {
      labels[i] = static_cast<MaskLabel>(-label);
      threshold = std::max(threshold, std::abs(w[i]));
    }
    out.kept_count.push_back(c - drop);
    out.pruned_count.push_back(drop);
    out.threshold.push_back(threshold);
  }
  state_.archived_second[t] = state_.current;
  SetState(t, TaskState::kSecondPruned);
  return out;
}

ReclaimOutcome MaskRegistry::Reclaim(TaskId t) {
  const int n = state_.preset_count;
  if (t <= n) {
    Fail(ErrorCode::kArgument, TaskLabel(t) + " is a preset task; nothing to reclaim");
  }
  const TaskId donor = t - n;
  if (donor > n || t > max_task()) {
    std::ostringstream os;
    os << TaskLabel(t) << " exceeds the scalable capacity (n=" << n
       << ", k=" << state_.additional_count << ")";
    Fail(ErrorCode::kScalabilityExceeded, os.str());
  }
  if (IsCannibalized(donor)) {
    Fail(ErrorCode::kDoubleReclaim, "reclaimable weights of " + TaskLabel(donor) +
                                        " were already reclaimed");
  }
  if (StateOf(t) != TaskState::kUnseen) {
    Fail(ErrorCode::kState, TaskLabel(t) + " already started");
  }
  if (StateOf(t - 1) != TaskState::kArchived) {
    Fail(ErrorCode::kState, TaskLabel(t - 1) + " must be archived first");
  }

  ReclaimOutcome out;
  out.positions = EmptyBitmap(state_.spec);
  const MaskLabel bar = static_cast<MaskLabel>(-donor);
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    LayerMask &labels = state_.current[l];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == bar) {
        labels[i] = static_cast<MaskLabel>(t);
        out.positions[l][i] = 1;
        ++out.count;
      }
    }
  }
  state_.cannibalized.insert(donor);
  SetState(t, TaskState::kReclaimed);
  return out;
}

void MaskRegistry::Archive(TaskId t) {
  RequireTask(t);
  const TaskState s = StateOf(t);
  const bool ok = IsPreset(t) ? s == TaskState::kSecondPruned : s == TaskState::kReclaimed;
  if (!ok) {
    Fail(ErrorCode::kState, "cannot archive " + TaskLabel(t) + " in state " +
                                StateName(s));
  }
  if (!IsPreset(t)) state_.archived_first[t] = state_.current;
  SetState(t, TaskState::kArchived);
}

Bitmap MaskRegistry::Compose(TaskId t, ViewMode mode, const ReuseRecord &reuse,
                             bool include_free) const {
  if (reuse.task != 0 && reuse.task != t) {
    Fail(ErrorCode::kArgument, "reuse record of task " + std::to_string(reuse.task) +
                                   " applied to " + TaskLabel(t));
  }
  // Resolve entries once per earlier task.
  std::vector<const ReuseEntry *> borrow(static_cast<std::size_t>(t), nullptr);
  for (TaskId h = 1; h < t; ++h) borrow[h] = reuse.Find(h);

  Bitmap out = EmptyBitmap(state_.spec);
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    const LayerMask &labels = state_.current[l];
    LayerBitmap &bits = out[l];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const int label = labels[i];
      if (label == 0) {
        bits[i] = include_free ? 1 : 0;
        continue;
      }
      const TaskId owner = std::abs(label);
      if (owner == t) {
        bits[i] = (label > 0 || mode == ViewMode::kMax) ? 1 : 0;
      } else if (owner < t) {
        const ReuseEntry *e = borrow[owner];
        if (e == nullptr || e->muted[l][i]) continue;
        if (label > 0) {
          bits[i] = 1;
        } else if (mode == ViewMode::kMax && !IsCannibalized(owner)) {
          bits[i] = 1;
        }
      }
    }
  }
  return out;
}

ParticipationView MaskRegistry::ComposeView(TaskId t, ViewMode mode,
                                            const ReuseRecord &reuse) const {
  RequireTask(t);
  const TaskState s = StateOf(t);
  if (s != TaskState::kSecondPruned && s != TaskState::kReclaimed &&
      s != TaskState::kArchived) {
    Fail(ErrorCode::kState, TaskLabel(t) + " is not trained (state " +
                                StateName(s) + ")");
  }
  if (mode == ViewMode::kMax && IsCannibalized(t)) {
    Fail(ErrorCode::kStaleModel, "maximum model of " + TaskLabel(t) +
                                     " was reclaimed; use the minimum model");
  }
  return ParticipationView::Inference(Compose(t, mode, reuse, false));
}

ParticipationView MaskRegistry::TrainableView(TaskId t, TrainPhase phase,
                                              const ReuseRecord &reuse) const {
  RequireTask(t);
  const TaskState s = StateOf(t);
  ParticipationView view;
  view.train_biases = true;
  view.trainable = EmptyBitmap(state_.spec);
  const MaskLabel own = static_cast<MaskLabel>(t);

  if (phase == TrainPhase::kInitial) {
    if (s != TaskState::kTraining) {
      Fail(ErrorCode::kState, "initial training of " + TaskLabel(t) +
                                  " in state " + StateName(s));
    }
    view.forward = Compose(t, ViewMode::kMax, reuse, true);
    for (std::size_t l = 0; l < state_.current.size(); ++l) {
      for (std::size_t i = 0; i < state_.current[l].size(); ++i) {
        view.trainable[l][i] = state_.current[l][i] == 0 ? 1 : 0;
      }
    }
    return view;
  }

  if (s != TaskState::kSecondPruned && s != TaskState::kReclaimed) {
    Fail(ErrorCode::kState, "fine-tuning of " + TaskLabel(t) + " in state " +
                                StateName(s));
  }
  const ViewMode mode =
      phase == TrainPhase::kMaxFinetune ? ViewMode::kMax : ViewMode::kMin;
  view.forward = Compose(t, mode, reuse, false);
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    for (std::size_t i = 0; i < state_.current[l].size(); ++i) {
      const MaskLabel label = state_.current[l][i];
      const bool train = mode == ViewMode::kMax ? std::abs(label) == own : label == own;
      view.trainable[l][i] = train ? 1 : 0;
    }
  }
  return view;
}

Bitmap MaskRegistry::OwnedBy(TaskId t) const {
  Bitmap out = EmptyBitmap(state_.spec);
  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    for (std::size_t i = 0; i < state_.current[l].size(); ++i) {
      out[l][i] = std::abs(static_cast<int>(state_.current[l][i])) == t ? 1 : 0;
    }
  }
  return out;
}

std::size_t MaskRegistry::CountLabel(MaskLabel label) const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < state_.current.size(); ++l) n += CountLabelInLayer(l, label);
  return n;
}

std::size_t MaskRegistry::CountLabelInLayer(std::size_t layer, MaskLabel label) const {
  return static_cast<std::size_t>(
      std::count(state_.current[layer].begin(), state_.current[layer].end(), label));
}

std::size_t MaskRegistry::StorageBytes() const {
  std::size_t n = 0;
  for (const LayerMask &layer : state_.current) n += layer.size() * sizeof(MaskLabel);
  return n;
}

std::vector<std::string> MaskRegistry::CheckInvariants() const {
  std::vector<std::string> v;
  const int n = state_.preset_count;
  const int total = max_task();
  auto where = [](std::size_t l, std::size_t i) {
    return "layer " + std::to_string(l) + " index " + std::to_string(i) + ": ";
  };

  if (state_.current.size() != state_.spec.size()) {
    v.push_back("label store has " + std::to_string(state_.current.size()) +
                " layers, spec has " + std::to_string(state_.spec.size()));
    return v;
  }
  for (std::size_t l = 0; l < state_.spec.size(); ++l) {
    if (state_.current[l].size() != state_.spec[l].in_dim * state_.spec[l].out_dim) {
      v.push_back("layer " + std::to_string(l) + ": label count does not match weights");
      return v;
    }
  }
  auto shaped_like_current = [&](const MaskSet &m) {
    if (m.size() != state_.current.size()) return false;
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (m[l].size() != state_.current[l].size()) return false;
    }
    return true;
  };

  for (TaskId t : state_.cannibalized) {
    if (!state_.archived_second.count(t)) {
      v.push_back(TaskLabel(t) + " is cannibalized but has no second-pruning snapshot");
    }
  }
  for (const auto &[t, second] : state_.archived_second) {
    auto first = state_.archived_first.find(t);
    if (first == state_.archived_first.end() || !shaped_like_current(second) ||
        !shaped_like_current(first->second)) {
      v.push_back(TaskLabel(t) + " has inconsistent archived masks");
      continue;
    }
    for (std::size_t l = 0; l < second.size(); ++l) {
      for (std::size_t i = 0; i < second[l].size(); ++i) {
        const MaskLabel a = first->second[l][i];
        const MaskLabel b = second[l][i];
        if (a != b && !(a == t && b == -t)) {
          v.push_back(where(l, i) + "second-pruning snapshot of " + TaskLabel(t) +
                      " differs from first by more than a -t relabel");
        }
      }
    }
  }

  for (std::size_t l = 0; l < state_.current.size(); ++l) {
    for (std::size_t i = 0; i < state_.current[l].size(); ++i) {
      const int label = state_.current[l][i];
      const int owner = std::abs(label);
      if (owner > total) {
        v.push_back(where(l, i) + "label " + std::to_string(label) + " out of range");
        continue;
      }
      if (label < 0 && owner > n) {
        v.push_back(where(l, i) + "additional " + TaskLabel(owner) +
                    " cannot hold a reclaimable label");
        continue;
      }
      if (label < 0 && IsCannibalized(owner)) {
        v.push_back(where(l, i) + "reclaimable label of cannibalized " +
                    TaskLabel(owner) + " survived reclamation");
        continue;
      }
      if (owner != 0 && state_.task_states[owner - 1] == TaskState::kUnseen) {
        v.push_back(where(l, i) + "label of unstarted " + TaskLabel(owner));
        continue;
      }

      // Which archived preset task committed this position?
      int claimant = 0;
      int claims = 0;
      for (const auto &[t, first] : state_.archived_first) {
        if (t > n || !shaped_like_current(first)) continue;
        if (first[l][i] == t) {
          claimant = t;
          ++claims;
        }
      }
      if (claims > 1) {
        v.push_back(where(l, i) + "committed to more than one task");
        continue;
      }
      if (claims == 0) {
        const bool in_progress =
            owner != 0 && state_.task_states[owner - 1] != TaskState::kArchived;
        if (label != 0 && !in_progress && owner <= n) {
          v.push_back(where(l, i) + "label " + std::to_string(label) +
                      " has no committing snapshot");
        } else if (label > n && state_.task_states[owner - 1] == TaskState::kArchived) {
          v.push_back(where(l, i) + "additional " + TaskLabel(owner) +
                      " holds a weight no preset task released");
        }
        continue;
      }
      // Allowed labels for a position committed to `claimant`.
      bool allowed = label == claimant;
      auto second = state_.archived_second.find(claimant);
      const bool reclaimable = second != state_.archived_second.end() &&
                               shaped_like_current(second->second) &&
                               second->second[l][i] == -claimant;
      if (reclaimable) {
        allowed = IsCannibalized(claimant) ? label == claimant + n : label == -claimant;
      } else if (second == state_.archived_second.end()) {
        // claimant is between its prunings
        allowed = label == claimant;
      }
      if (!allowed) {
        v.push_back(where(l, i) + "label " + std::to_string(label) +
                    " conflicts with the commitment to " + TaskLabel(claimant));
      }
    }
  }
  return v;
}

}  // namespace silf
