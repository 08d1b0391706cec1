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

#include <filesystem>
#include <string>

#include "soundtrig/acoustics.hpp"

namespace soundtrig {

// RIFF/WAVE, 16-bit little-endian PCM. Samples are clamped to [-1, 1] and
// scaled by 32767 on write; read divides by 32768.
std::string encode_wav_mono(const Waveform& w);
std::string encode_wav_stereo(const BinauralFrame& frame);

void write_wav(const std::filesystem::path& path, const Waveform& w);
void write_wav(const std::filesystem::path& path, const BinauralFrame& frame);

struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<std::vector<double>> channel_samples;
};

WavData decode_wav(const std::string& bytes);
WavData read_wav(const std::filesystem::path& path);

}  // namespace soundtrig
