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

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "soundtrig/acoustics.hpp"
#include "soundtrig/soundbank.hpp"

namespace soundtrig {

inline constexpr std::size_t kStftFrame = 512;
inline constexpr std::size_t kStftHop = 160;
inline constexpr int kMelBands = 64;
inline constexpr double kLogFloor = 1e-10;

enum class Channel { Mono, Left, Right };

struct Spectrogram {
  std::vector<std::vector<double>> magnitudes;  // [frame][bin]
  std::size_t frame = kStftFrame;
  std::size_t hop = kStftHop;
  int sample_rate = kSampleRate;
  Channel channel = Channel::Mono;

  std::size_t frames() const { return magnitudes.size(); }
  std::size_t bins() const { return frame / 2 + 1; }
};

struct MelSpectrogram {
  std::vector<std::vector<double>> log_energies;  // [frame][band]
  int band_count = kMelBands;
};

std::vector<double> hann_window(std::size_t n);

Spectrogram stft(const Waveform& w, std::size_t frame = kStftFrame, std::size_t hop = kStftHop,
                 Channel channel = Channel::Mono);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// [band][bin] triangular filters on the mel scale. The raw filters sum to one
// at every bin; pass normalized = true for rows that each sum to one.
std::vector<std::vector<double>> mel_filterbank(int bands, std::size_t frame, int sample_rate,
                                                bool normalized);

MelSpectrogram mel_spectrogram(const Spectrogram& s, int bands = kMelBands);

struct AudioFeatures {
  double ild_db = 0.0;
  int itd_samples = 0;  // positive: left channel leads
  bool itd_valid = false;
  std::array<double, kBandCount> band_energies{};
  double spectral_centroid = 0.0;
  double spectral_flatness = 0.0;
  double level = 0.0;  // mean energy per sample over both channels
};

int max_itd_lag(double head_width = 0.18);

AudioFeatures direction_features(const BinauralFrame& frame, double head_width = 0.18);

struct Classification {
  Category category = Category::Alarm;
  double confidence = 0.0;
  // Winner first, then the others ordered by how well each explains the
  // residual of a two-source blend with the winner. Confidences sum to one.
  std::vector<std::pair<Category, double>> ranking;
  bool silent = false;
};

// Nearest-centroid classifier on time-averaged mel vectors, one centroid per
// training clip; a category scores its closest centroid. With `exclude`, the
// input is treated as a mixture containing that category: each candidate is
// scored by how well a non-negative blend of an excluded-category centroid and
// its own centroid explains the input power spectrum.
class CategoryClassifier {
 public:
  static constexpr double kTemperature = 0.05;

  bool fitted() const { return !centroids_.empty(); }

  void fit(const SoundBank& bank, double step_seconds = kDefaultStepSeconds);
  // Each sample becomes one centroid.
  void fit_vectors(const std::vector<std::pair<Category, std::vector<double>>>& samples);

  Classification classify(const MelSpectrogram& mel,
                          std::optional<Category> exclude = std::nullopt) const;
  Classification classify(const Waveform& w, std::optional<Category> exclude = std::nullopt) const;
  Classification classify(const BinauralFrame& frame,
                          std::optional<Category> exclude = std::nullopt) const;
  Classification classify_vector(const std::vector<double>& v, bool silent,
                                 std::optional<Category> exclude) const;

  // L1-normalized mean mel power, square-rooted. Empty when silent.
  static std::vector<double> embed(const MelSpectrogram& mel);

  nlohmann::json to_json() const;
  static CategoryClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static CategoryClassifier load(const std::filesystem::path& path);

  const std::vector<std::pair<Category, std::vector<double>>>& centroids() const {
    return centroids_;
  }

 private:
  std::vector<std::pair<Category, std::vector<double>>> centroids_;
};

struct RangeScan {
  std::vector<double> ranges;
  double max_range = 5.0;
  double fov = 0.0;
};

RangeScan range_scan(const OccupancyGrid& grid, Vec2 pose, double heading, int ray_count = 64,
                     double fov = std::numbers::pi / 2, double max_range = 5.0);
RangeScan range_scan(const Scene& scene, Vec2 pose, double heading, int ray_count = 64,
                     double fov = std::numbers::pi / 2, double max_range = 5.0);

}  // namespace soundtrig
