// Copyright 2026 The soundtrig Authors
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
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <tuple>

#include "soundtrig/acoustics.hpp"

namespace soundtrig {

// Memoizes compute_rir on a 1 cm lattice. Positions are snapped to the
// lattice before the RIR is computed so the cached value does not depend on
// which caller inserted it first.
class RirCache {
 public:
  static constexpr double kQuantum = 0.01;

  ImpulseResponse get(const Scene& scene, Vec2 source, Vec2 ear, const RirOptions& options);

  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;

  // Little-endian: "STRC", u32 version, u64 entry count, then per entry the
  // key fields and a u32 tap count followed by float32 taps.
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

  static Vec2 snap(Vec2 p);

 private:
  using Key = std::tuple<std::uint64_t, std::int32_t, std::int32_t, std::int32_t, std::int32_t,
                         std::int32_t, std::int32_t, std::int32_t>;
  static Key make_key(std::uint64_t scene_hash, Vec2 source, Vec2 ear, const RirOptions& options);

  mutable std::shared_mutex mutex_;
  std::map<Key, std::vector<double>> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace soundtrig
