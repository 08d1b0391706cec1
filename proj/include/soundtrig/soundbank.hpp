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
#include <string>
#include <vector>

#include "json.hpp"
#include "soundtrig/acoustics.hpp"

namespace soundtrig {

enum class Split { Train, Test };
std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

inline constexpr double kClipSeconds = 4.0;
inline constexpr double kPeakAmplitude = 0.9;
inline constexpr double kDefaultStepSeconds = 1.0;

struct SoundClip {
  std::string clip_id;
  Category category = Category::Alarm;
  Split split = Split::Train;
  Waveform waveform;
  bool loop = true;
  nlohmann::json params;  // synthesis parameters, also the disjointness key
};

// Instance counts per (category, split).
int bank_count(Category c, Split s);

struct SoundBank {
  std::uint64_t seed = 0;
  std::vector<SoundClip> clips;

  const SoundClip& at(std::string_view clip_id) const;
  const SoundClip* find(std::string_view clip_id) const;
  std::vector<const SoundClip*> select(Category c, Split s) const;
};

SoundBank synthesize_bank(std::uint64_t seed);

// Samples [t*step, (t+1)*step) of the looped clip.
Waveform window_of(const SoundClip& clip, long t_step, double step_seconds = kDefaultStepSeconds);

nlohmann::json bank_manifest(const SoundBank& bank);
void write_bank(const SoundBank& bank, const std::filesystem::path& dir, bool with_wavs);

double spectral_flatness(const Waveform& w);

}  // namespace soundtrig
