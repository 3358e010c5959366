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

#ifndef SILF_MASKSTORE_HPP_
#define SILF_MASKSTORE_HPP_

// Per-weight task labels and their lifecycle.
//
// Every weight carries one signed label:
//    0   free
//   +t   committed to task t
//   -t   owned by preset task t but reclaimable by additional task n+t
//
// A preset task t goes kUnseen -> kTraining -> kFirstPruned -> kSecondPruned
// -> kArchived. An additional task goes kUnseen -> kReclaimed -> kArchived.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "silf/neuralcore.hpp"

namespace silf {

using TaskId = int;
using MaskLabel = std::int16_t;
using LayerMask = std::vector<MaskLabel>;
using MaskSet = std::vector<LayerMask>;

enum class ViewMode { kMax, kMin };
enum class TrainPhase { kInitial, kMaxFinetune, kMinFinetune };

const char *ViewModeName(ViewMode mode);

enum class TaskState : std::uint8_t {
  kUnseen = 0,
  kTraining = 1,
  kFirstPruned = 2,
  kSecondPruned = 3,
  kReclaimed = 4,
  kArchived = 5,
};

struct PruneOutcome {
  std::vector<std::size_t> kept_count;
  std::vector<std::size_t> pruned_count;
  // Largest |w| among the pruned weights of each layer (0 if none pruned).
  std::vector<double> threshold;
};

struct ReclaimOutcome {
  std::size_t count = 0;
  Bitmap positions;
};

// Muting decisions of one task against one earlier task.
struct ReuseEntry {
  TaskId prev_task = 0;
  double srcc = 0.0;
  double reuse_ratio = 1.0;
  // Which view of prev_task produced the scores.
  ViewMode eval_mode = ViewMode::kMax;
  Bitmap muted;
  std::vector<std::size_t> owned_count;
  std::vector<std::size_t> muted_count;

  bool operator==(const ReuseEntry &) const = default;
};

// Everything task `task` may borrow from earlier tasks. A weight of an
// earlier task is visible only through an entry here.
struct ReuseRecord {
  TaskId task = 0;
  std::vector<ReuseEntry> entries;

  const ReuseEntry *Find(TaskId prev) const;
  bool operator==(const ReuseRecord &) const = default;
};

struct RegistryState {
  NetSpec spec;
  int preset_count = 0;
  int additional_count = 0;
  MaskSet current;
  std::map<TaskId, MaskSet> archived_first;
  std::map<TaskId, MaskSet> archived_second;
  std::set<TaskId> cannibalized;
  std::vector<TaskState> task_states;  // index t - 1

  bool operator==(const RegistryState &) const = default;
};

class MaskRegistry {
 public:
  MaskRegistry(const NetSpec &spec, int preset_count, int additional_count);
  explicit MaskRegistry(RegistryState state);

  int preset_count() const { return state_.preset_count; }
  int additional_count() const { return state_.additional_count; }
  int max_task() const { return state_.preset_count + state_.additional_count; }
  const NetSpec &spec() const { return state_.spec; }
  const MaskSet &current() const { return state_.current; }
  const RegistryState &state() const { return state_; }
  // Direct access for deserialisation and fault-injection tests.
  RegistryState &mutable_state() { return state_; }

  bool IsPreset(TaskId t) const { return t >= 1 && t <= state_.preset_count; }
  bool IsCannibalized(TaskId t) const { return state_.cannibalized.count(t) > 0; }
  TaskState StateOf(TaskId t) const;
  // Highest task id past kUnseen, 0 if none.
  TaskId LastTask() const;

  // Opens preset task t for initial training; t must be the next id.
  void BeginPresetTask(TaskId t);

  // Releases the ceil(ratio * c) smallest-|w| free weights of each layer
  // (zeroing them) and commits the rest to t. Snapshots M_t.
  PruneOutcome FirstPrune(NetworkParams &params, TaskId t, double ratio);

  // Relabels the ceil(ratio * c_t) smallest-|w| weights labelled +t to -t.
  // Values are kept. Snapshots M'_t.
  PruneOutcome SecondPrune(const NetworkParams &params, TaskId t, double ratio);

  // Hands every -(t-n) weight to additional task t. Opens t for training.
  ReclaimOutcome Reclaim(TaskId t);

  void Archive(TaskId t);

  // Inference view of a trained task. Max includes the task's -t weights;
  // min does not. Borrowed weights of earlier task h enter through
  // reuse.Find(h) minus its muted set; in min mode only +h weights of h are
  // borrowed.
  ParticipationView ComposeView(TaskId t, ViewMode mode,
                                const ReuseRecord &reuse) const;

  ParticipationView TrainableView(TaskId t, TrainPhase phase,
                                  const ReuseRecord &reuse) const;

  // Weights currently owned by task t (labels +t and -t).
  Bitmap OwnedBy(TaskId t) const;

  std::size_t CountLabel(MaskLabel label) const;
  std::size_t CountLabelInLayer(std::size_t layer, MaskLabel label) const;
  // Bytes of the live label store; constant for the lifetime of a registry.
  std::size_t StorageBytes() const;

  // Empty iff the registry is consistent.
  std::vector<std::string> CheckInvariants() const;

 private:
  void RequireTask(TaskId t) const;
  void SetState(TaskId t, TaskState s) { state_.task_states[t - 1] = s; }
  Bitmap Compose(TaskId t, ViewMode mode, const ReuseRecord &reuse,
                 bool include_free) const;

  RegistryState state_;
};

// Number of items selected when a ratio is applied to `count` candidates.
// Products within 1e-9 of an integer snap to it before rounding.
std::size_t CeilCount(double ratio, std::size_t count);
std::size_t FloorCount(double ratio, std::size_t count);

// Candidate indices ordered by (|value|, index) ascending, truncated to
// `take`.
std::vector<std::size_t> SmallestByMagnitude(const std::vector<double> &values,
                                             const std::vector<std::size_t> &candidates,
                                             std::size_t take);

}  // namespace silf

#endif  // SILF_MASKSTORE_HPP_
