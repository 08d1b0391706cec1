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


#include "soundtrig/rir_cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include "soundtrig/errors.hpp"

namespace soundtrig {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'R', 'C'};
constexpr std::uint32_t kVersion = 1;

std::int32_t quantize(double v) {
  return static_cast<std::int32_t>(std::lround(v / RirCache::kQuantum));
}

template <typename T>
void put(std::ofstream& f, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  f.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& f) {
  unsigned char buf[sizeof(T)];
  if (!f.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("rir cache: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

Vec2 RirCache::snap(Vec2 p) { return {quantize(p.x) * kQuantum, quantize(p.y) * kQuantum}; }

RirCache::Key RirCache::make_key(std::uint64_t scene_hash, Vec2 source, Vec2 ear,
                                 const RirOptions& options) {
  return {scene_hash,
          quantize(source.x),
          quantize(source.y),
          quantize(ear.x),
          quantize(ear.y),
          options.max_order,
          options.band,
          static_cast<std::int32_t>(std::lround(options.max_length * kSampleRate))};
}

ImpulseResponse RirCache::get(const Scene& scene, Vec2 source, Vec2 ear,
                              const RirOptions& options) {
  const Vec2 s = snap(source);
  const Vec2 e = snap(ear);
  const Key key = make_key(scene.hash(), s, e, options);
  ImpulseResponse rir;
  rir.source_pos = s;
  rir.ear_pos = e;
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      rir.taps = it->second;
      lock.unlock();
      std::unique_lock w(mutex_);
      ++hits_;
      return rir;
    }
  }
  rir = compute_rir(scene, s, e, options);
  std::unique_lock lock(mutex_);
  entries_.emplace(key, rir.taps);
  ++misses_;
  return rir;
}

std::size_t RirCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t RirCache::hits() const {
  std::shared_lock lock(mutex_);
  return hits_;
}

std::size_t RirCache::misses() const {
  std::shared_lock lock(mutex_);
  return misses_;
}

void RirCache::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  f.write(kMagic, 4);
  put<std::uint32_t>(f, kVersion);
  put<std::uint64_t>(f, entries_.size());
  for (const auto& [key, taps] : entries_) {
    put<std::uint64_t>(f, std::get<0>(key));
    put<std::int32_t>(f, std::get<1>(key));
    put<std::int32_t>(f, std::get<2>(key));
    put<std::int32_t>(f, std::get<3>(key));
    put<std::int32_t>(f, std::get<4>(key));
    put<std::int32_t>(f, std::get<5>(key));
    put<std::int32_t>(f, std::get<6>(key));
    put<std::int32_t>(f, std::get<7>(key));
    put<std::uint32_t>(f, static_cast<std::uint32_t>(taps.size()));
    for (double t : taps) put<float>(f, static_cast<float>(t));
  }
  if (!f) throw IoFailure("write failed: " + path.string());
}

void RirCache::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path.string());
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("rir cache: bad magic");
  }
  if (read_le<std::uint32_t>(f) != kVersion) throw FormatError("rir cache: unsupported version");
  const auto count = read_le<std::uint64_t>(f);
  std::map<Key, std::vector<double>> loaded;
  for (std::uint64_t n = 0; n < count; ++n) {
    Key key;
    std::get<0>(key) = read_le<std::uint64_t>(f);
    std::get<1>(key) = read_le<std::int32_t>(f);
    std::get<2>(key) = read_le<std::int32_t>(f);
    std::get<3>(key) = read_le<std::int32_t>(f);
    std::get<4>(key) = read_le<std::int32_t>(f);
    std::get<5>(key) = read_le<std::int32_t>(f);
    std::get<6>(key) = read_le<std::int32_t>(f);
    std::get<7>(key) = read_le<std::int32_t>(f);
    const auto taps = read_le<std::uint32_t>(f);
    std::vector<double> v(taps);
    for (auto& t : v) t = read_le<float>(f);
    loaded.emplace(key, std::move(v));
  }
  std::unique_lock lock(mutex_);
  for (auto& [k, v] : loaded) entries_.insert_or_assign(k, std::move(v));
}

}  // namespace soundtrig
