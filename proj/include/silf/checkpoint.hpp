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

#ifndef SILF_CHECKPOINT_HPP_
#define SILF_CHECKPOINT_HPP_

// Binary checkpoint container.
//
//   "SILFCKPT"                8 bytes
//   format version            u32
//   section count             u32
//   per section:  name length u32, name bytes, payload length u64, payload
//
// Integers and IEEE-754 doubles are little-endian; labels are i16. Sections:
// engine, neuralcore, maskstore, relevance, probes. Run configuration lives in
// the JSON sidecar, so two runs that end in the same state produce the same
// bytes.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "silf/engine.hpp"

namespace silf {

inline constexpr std::string_view kCheckpointMagic = "SILFCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct SectionInfo {
  std::string name;
  std::uint64_t offset = 0;  // of the payload
  std::uint64_t length = 0;
};

struct EncodedCheckpoint {
  std::string bytes;
  std::vector<SectionInfo> sections;
};

EncodedCheckpoint EncodeCheckpoint(const Checkpoint &ckpt);
// kFormat on bad magic, version or truncated data.
Checkpoint DecodeCheckpoint(std::string_view bytes);

// Writes `path` and the sidecar `path + ".json"` (section offsets, config
// hash, config).
void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path,
                    const std::string &config_json);
Checkpoint LoadCheckpoint(const std::string &path);

}  // namespace silf

#endif  // SILF_CHECKPOINT_HPP_
