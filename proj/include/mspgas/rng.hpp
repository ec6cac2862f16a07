// Copyright 2026 The mspgas Authors
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
#include <initializer_list>
#include <random>

namespace mspgas {

/// Seed of a random stream. Kept distinct from plain integers so that seeds are
/// never confused with counts or indices in signatures.
struct RandomSeed {
  std::uint64_t value = 0;

  friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

/// SplitMix64 finalizer; used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seedable generator. Identical seed and identical call sequence give a
/// bit-identical stream of draws.
class Rng {
 public:
  explicit Rng(RandomSeed seed) : engine_(mix64(seed.value)) {}

  /// Deterministic sub-stream keyed by a path of integers, e.g. {tag, iteration, d}.
  static Rng derive(RandomSeed seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed.value);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return Rng(RandomSeed{h});
  }

  /// Child stream; consumes exactly one draw from this stream.
  Rng split(std::uint64_t stream) {
    const std::uint64_t base = engine_();
    return derive(RandomSeed{base}, {stream});
  }

  std::uint64_t next_u64() { return engine_(); }

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double chi_squared(double dof) { return std::chi_squared_distribution<double>(dof)(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mspgas
