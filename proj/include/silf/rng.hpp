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

#ifndef SILF_RNG_HPP_
#define SILF_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace silf {

// Derives an independent 64-bit seed for a named stream ("task/3",
// "epoch/2/17", ...) from the root seed, so adding streams never perturbs
// existing ones.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view stream);

std::uint64_t Fnv1a64(std::string_view bytes);

// mt19937_64 is bit-specified by the standard; the distributions below are
// hand-rolled because the std:: ones are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root, std::string_view stream)
      : engine_(DeriveSeed(root, stream)) {}

  std::uint64_t NextU64() { return engine_(); }
  // [0, 1)
  double Uniform01();
  double Uniform(double lo, double hi);
  double Normal();
  // [0, bound)
  std::uint64_t Below(std::uint64_t bound);

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace silf

#endif  // SILF_RNG_HPP_
