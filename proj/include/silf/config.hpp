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

#ifndef SILF_CONFIG_HPP_
#define SILF_CONFIG_HPP_

// JSON run configuration with sections net / sequence / optimizer / tasks.
// Unknown keys are rejected. All failures raise kValidation.

#include <cstdint>
#include <optional>
#include <string>

#include "silf/engine.hpp"
#include "silf/tasksuite.hpp"

namespace silf {

struct RunConfig {
  SequenceConfig sequence;
  TaskSuite suite{{}};
  std::size_t trials = 1;
  std::vector<std::string> warnings;
};

RunConfig ParseRunConfig(const std::string &json_text,
                         std::optional<std::uint64_t> seed_override = std::nullopt);

// Fully resolved configuration (every default spelled out, task seeds
// explicit). Parsing it again yields the same RunConfig.
std::string CanonicalConfigJson(const RunConfig &config);

// The bundled default: n = 3, k = 3, P = [0.7, 0.5, 0], P' = [0.4, 0.4, 0.4],
// lambda = 0.5, default six-task suite.
std::string DefaultConfigJson();

}  // namespace silf

#endif  // SILF_CONFIG_HPP_
