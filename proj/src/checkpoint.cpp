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

#include "silf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include "json.hpp"
#include "silf/error.hpp"
#include "silf/rng.hpp"
#include "silf/textio.hpp"

namespace silf {

namespace {

class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void I16(std::int16_t v) { Le(static_cast<std::uint16_t>(v), 2); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void F64s(const std::vector<double> &v) {
    U64(v.size());
    for (double x : v) F64(x);
  }
  void Bits(const std::vector<std::uint8_t> &v) {
    U64(v.size());
    for (std::uint8_t x : v) U8(x);
  }
  void Labels(const LayerMask &v) {
    U64(v.size());
    for (MaskLabel x : v) I16(x);
  }
  std::string &bytes() { return out_; }

 private:
  void Le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string where) : data_(data), where_(std::move(where)) {}

  std::uint8_t U8() { return static_cast<std::uint8_t>(Take(1)[0]); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  std::int16_t I16() { return static_cast<std::int16_t>(static_cast<std::uint16_t>(Le(2))); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const std::uint32_t n = U32();
    return std::string(Take(n));
  }
  std::vector<double> F64s(std::size_t expect) {
    const std::uint64_t n = Count(8);
    if (n != expect) Bad("array length " + std::to_string(n) + " != " + std::to_string(expect));
    std::vector<double> v(n);
    for (double &x : v) x = F64();
    return v;
  }
  std::vector<double> F64sAny() {
    std::vector<double> v(Count(8));
    for (double &x : v) x = F64();
    return v;
  }
  std::vector<std::uint8_t> Bits(std::size_t expect) {
    const std::uint64_t n = Count(1);
    if (n != expect) Bad("bitmap length mismatch");
    std::vector<std::uint8_t> v(n);
    for (auto &x : v) {
      x = U8();
      if (x > 1) Bad("bitmap value out of range");
    }
    return v;
  }
  LayerMask Labels(std::size_t expect) {
    const std::uint64_t n = Count(2);
    if (n != expect) Bad("label array length mismatch");
    LayerMask v(n);
    for (auto &x : v) x = I16();
    return v;
  }
  // Element count whose payload must fit in the remaining bytes.
  std::uint64_t Count(std::size_t elem) {
    const std::uint64_t n = U64();
    if (n > (data_.size() - pos_) / elem) Bad("array overruns section");
    return n;
  }
  std::uint32_t SmallCount() {
    const std::uint32_t n = U32();
    if (n > data_.size() - pos_) Bad("count overruns section");
    return n;
  }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void Bad(const std::string &what) const {
    Fail(ErrorCode::kFormat, "checkpoint " + where_ + ": " + what);
  }

 private:
  std::string_view Take(std::size_t n) {
    if (n > data_.size() - pos_) Bad("truncated");
    std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t Le(int n) {
    std::string_view s = Take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string where_;
};

std::string EncodeEngine(const Checkpoint &ckpt) {
  ByteWriter w;
  const MaskRegistry &reg = ckpt.registry;
  w.I32(reg.preset_count());
  w.I32(reg.additional_count());
  w.U32(static_cast<std::uint32_t>(reg.spec().size()));
  for (const LayerSpec &ls : reg.spec()) {
    w.U64(ls.in_dim);
    w.U64(ls.out_dim);
    w.U8(static_cast<std::uint8_t>(ls.activation));
  }
  w.U32(static_cast<std::uint32_t>(ckpt.tasks.size()));
  for (const TaskRecord &rec : ckpt.tasks) {
    w.I32(rec.id);
    w.U8(static_cast<std::uint8_t>(rec.stage));
    w.Str(rec.dataset_id);
    w.U32(static_cast<std::uint32_t>(rec.phases.size()));
    for (const PhaseMark &p : rec.phases) {
      w.Str(p.phase);
      w.U64(p.step);
    }
  }
  return std::move(w.bytes());
}

std::string EncodeNeural(const Checkpoint &ckpt) {
  ByteWriter w;
  for (const DenseLayer &layer : ckpt.params.layers) {
    w.F64s(layer.weights);
    w.F64s(layer.biases);
  }
  for (const TaskRecord &rec : ckpt.tasks) {
    for (const std::vector<double> &b : rec.biases) w.F64s(b);
  }
  return std::move(w.bytes());
}

void EncodeMaskSet(ByteWriter &w, const MaskSet &m) {
  for (const LayerMask &layer : m) w.Labels(layer);
}

std::string EncodeMasks(const Checkpoint &ckpt) {
  ByteWriter w;
  const RegistryState &s = ckpt.registry.state();
  EncodeMaskSet(w, s.current);
  for (TaskState ts : s.task_states) w.U8(static_cast<std::uint8_t>(ts));
  for (const auto *archive : {&s.archived_first, &s.archived_second}) {
    w.U32(static_cast<std::uint32_t>(archive->size()));
    for (const auto &[t, m] : *archive) {
      w.I32(t);
      EncodeMaskSet(w, m);
    }
  }
  w.U32(static_cast<std::uint32_t>(s.cannibalized.size()));
  for (TaskId t : s.cannibalized) w.I32(t);
  return std::move(w.bytes());
}

std::string EncodeRelevance(const Checkpoint &ckpt) {
  ByteWriter w;
  for (const TaskRecord &rec : ckpt.tasks) {
    w.I32(rec.reuse.task);
    w.U32(static_cast<std::uint32_t>(rec.reuse.entries.size()));
    for (const ReuseEntry &e : rec.reuse.entries) {
      w.I32(e.prev_task);
      w.F64(e.srcc);
      w.F64(e.reuse_ratio);
      w.U8(static_cast<std::uint8_t>(e.eval_mode));
      for (std::size_t l = 0; l < e.muted.size(); ++l) {
        w.U64(e.owned_count[l]);
        w.U64(e.muted_count[l]);
        w.Bits(e.muted[l]);
      }
    }
  }
  return std::move(w.bytes());
}

std::string EncodeProbes(const Checkpoint &ckpt) {
  ByteWriter w;
  for (const TaskRecord &rec : ckpt.tasks) {
    w.F64s(rec.probe.inputs);
    w.F64s(rec.probe.eval_predictions);
    w.F64s(rec.probe.min_predictions);
  }
  return std::move(w.bytes());
}

MaskSet DecodeMaskSet(ByteReader &r, const NetSpec &spec) {
  MaskSet m;
  for (const LayerSpec &ls : spec) m.push_back(r.Labels(ls.in_dim * ls.out_dim));
  return m;
}

}  // namespace

EncodedCheckpoint EncodeCheckpoint(const Checkpoint &ckpt) {
  const std::pair<const char *, std::string> sections[] = {
      {"engine", EncodeEngine(ckpt)},       {"neuralcore", EncodeNeural(ckpt)},
      {"maskstore", EncodeMasks(ckpt)},     {"relevance", EncodeRelevance(ckpt)},
      {"probes", EncodeProbes(ckpt)},
  };
  EncodedCheckpoint out;
  ByteWriter w;
  w.bytes().append(kCheckpointMagic);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<std::uint32_t>(std::size(sections)));
  for (const auto &[name, payload] : sections) {
    w.Str(name);
    w.U64(payload.size());
    out.sections.push_back(SectionInfo{name, w.bytes().size(), payload.size()});
    w.bytes().append(payload);
  }
  out.bytes = std::move(w.bytes());
  return out;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size() ||
      bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    Fail(ErrorCode::kFormat, "not a SILF checkpoint");
  }
  ByteReader head(bytes.substr(kCheckpointMagic.size()), "header");
  const std::uint32_t version = head.U32();
  if (version != kCheckpointVersion) {
    Fail(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = head.SmallCount();
  std::map<std::string, std::string_view> found;
  {
    std::size_t pos = kCheckpointMagic.size() + 8;
    for (std::uint32_t s = 0; s < count; ++s) {
      ByteReader r(bytes.substr(pos), "section table");
      std::string name = r.Str();
      const std::uint64_t len = r.U64();
      const std::size_t start = pos + 4 + name.size() + 8;
      if (len > bytes.size() - start) Fail(ErrorCode::kFormat, "checkpoint section " + name + " truncated");
      found[name] = bytes.substr(start, len);
      pos = start + len;
    }
  }
  auto section = [&](const char *name) {
    auto it = found.find(name);
    if (it == found.end()) Fail(ErrorCode::kFormat, std::string("checkpoint lacks section ") + name);
    return ByteReader(it->second, name);
  };

  ByteReader eng = section("engine");
  RegistryState state;
  state.preset_count = eng.I32();
  state.additional_count = eng.I32();
  if (state.preset_count < 1 || state.additional_count < 0 ||
      state.additional_count > state.preset_count) {
    eng.Bad("invalid task capacity");
  }
  const std::uint32_t depth = eng.SmallCount();
  for (std::uint32_t l = 0; l < depth; ++l) {
    LayerSpec ls;
    ls.in_dim = eng.U64();
    ls.out_dim = eng.U64();
    const std::uint8_t act = eng.U8();
    if (act > 2 || ls.in_dim == 0 || ls.out_dim == 0 || ls.in_dim > (1u << 20) ||
        ls.out_dim > (1u << 20)) {
      eng.Bad("invalid layer");
    }
    ls.activation = static_cast<Activation>(act);
    state.spec.push_back(ls);
  }
  try {
    ValidateNetSpec(state.spec);
  } catch (const Error &e) {
    eng.Bad(e.what());
  }
  const std::uint32_t tasks = eng.SmallCount();
  if (tasks > static_cast<std::uint32_t>(state.preset_count + state.additional_count)) {
    eng.Bad("more tasks than capacity");
  }
  std::vector<TaskRecord> records(tasks);
  for (std::uint32_t t = 0; t < tasks; ++t) {
    TaskRecord &rec = records[t];
    rec.id = eng.I32();
    if (rec.id != static_cast<TaskId>(t + 1)) eng.Bad("task ids are not contiguous");
    const std::uint8_t stage = eng.U8();
    if (stage > 1) eng.Bad("bad stage");
    rec.stage = static_cast<Stage>(stage);
    rec.dataset_id = eng.Str();
    const std::uint32_t marks = eng.SmallCount();
    for (std::uint32_t k = 0; k < marks; ++k) {
      PhaseMark p;
      p.phase = eng.Str();
      p.step = eng.U64();
      rec.phases.push_back(std::move(p));
    }
  }
  if (!eng.done()) eng.Bad("trailing bytes");

  ByteReader nn = section("neuralcore");
  NetworkParams params = NetworkParams::Zeros(state.spec);
  for (DenseLayer &layer : params.layers) {
    layer.weights = nn.F64s(layer.weights.size());
    layer.biases = nn.F64s(layer.biases.size());
  }
  for (TaskRecord &rec : records) {
    for (const LayerSpec &ls : state.spec) rec.biases.push_back(nn.F64s(ls.out_dim));
  }
  if (!nn.done()) nn.Bad("trailing bytes");
  if (!params.AllFinite()) nn.Bad("non-finite parameter");

  ByteReader mk = section("maskstore");
  state.current = DecodeMaskSet(mk, state.spec);
  state.task_states.resize(static_cast<std::size_t>(state.preset_count + state.additional_count));
  for (TaskState &ts : state.task_states) {
    const std::uint8_t v = mk.U8();
    if (v > static_cast<std::uint8_t>(TaskState::kArchived)) mk.Bad("bad task state");
    ts = static_cast<TaskState>(v);
  }
  for (auto *archive : {&state.archived_first, &state.archived_second}) {
    const std::uint32_t n = mk.SmallCount();
    for (std::uint32_t k = 0; k < n; ++k) {
      const TaskId t = mk.I32();
      (*archive)[t] = DecodeMaskSet(mk, state.spec);
    }
  }
  const std::uint32_t cann = mk.SmallCount();
  for (std::uint32_t k = 0; k < cann; ++k) state.cannibalized.insert(mk.I32());
  if (!mk.done()) mk.Bad("trailing bytes");

  ByteReader rel = section("relevance");
  for (TaskRecord &rec : records) {
    rec.reuse.task = rel.I32();
    const std::uint32_t entries = rel.SmallCount();
    for (std::uint32_t k = 0; k < entries; ++k) {
      ReuseEntry e;
      e.prev_task = rel.I32();
      if (e.prev_task < 1 || e.prev_task >= rec.id) rel.Bad("reuse entry names a later task");
      e.srcc = rel.F64();
      e.reuse_ratio = rel.F64();
      const std::uint8_t mode = rel.U8();
      if (mode > 1) rel.Bad("bad view mode");
      e.eval_mode = static_cast<ViewMode>(mode);
      for (const LayerSpec &ls : state.spec) {
        e.owned_count.push_back(rel.U64());
        e.muted_count.push_back(rel.U64());
        e.muted.push_back(rel.Bits(ls.in_dim * ls.out_dim));
      }
      rec.reuse.entries.push_back(std::move(e));
    }
  }
  if (!rel.done()) rel.Bad("trailing bytes");

  ByteReader pr = section("probes");
  const std::size_t dim = state.spec.front().in_dim;
  for (TaskRecord &rec : records) {
    rec.probe.inputs = pr.F64sAny();
    if (rec.probe.inputs.size() % dim != 0) pr.Bad("probe width mismatch");
    const std::size_t rows = rec.probe.inputs.size() / dim;
    rec.probe.eval_predictions = pr.F64s(rows);
    rec.probe.min_predictions = pr.F64s(rows);
  }
  if (!pr.done()) pr.Bad("trailing bytes");

  Checkpoint ckpt{std::move(params), MaskRegistry(std::move(state)), std::move(records)};
  const std::vector<std::string> problems = ckpt.registry.CheckInvariants();
  if (!problems.empty()) Fail(ErrorCode::kFormat, "checkpoint masks inconsistent: " + problems.front());
  return ckpt;
}

void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path,
                    const std::string &config_json) {
  const EncodedCheckpoint enc = EncodeCheckpoint(ckpt);
  WriteFile(path, enc.bytes);
  nlohmann::ordered_json side;
  side["format"] = std::string(kCheckpointMagic);
  side["version"] = kCheckpointVersion;
  side["size"] = enc.bytes.size();
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(config_json)));
  side["config_hash"] = hash;
  nlohmann::ordered_json secs = nlohmann::ordered_json::array();
  for (const SectionInfo &s : enc.sections) {
    secs.push_back({{"name", s.name}, {"offset", s.offset}, {"length", s.length}});
  }
  side["sections"] = secs;
  side["tasks"] = ckpt.tasks.size();
  if (!config_json.empty()) side["config"] = nlohmann::ordered_json::parse(config_json);
  WriteFile(path + ".json", side.dump(2) + "\n");
}

Checkpoint LoadCheckpoint(const std::string &path) {
  return DecodeCheckpoint(ReadFile(path));
}

}  // namespace silf
