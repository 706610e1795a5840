// Copyright 2026 The twintrap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace twintrap {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory `index` in an ensemble; identical on every platform.
constexpr std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Per-trajectory random stream. std::mt19937_64 output is fully specified
/// by the standard; the double conversion below is done by hand because the
/// standard distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace twintrap
