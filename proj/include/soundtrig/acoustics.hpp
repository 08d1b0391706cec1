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

#include <optional>
#include <span>
#include <vector>

#include "soundtrig/world.hpp"

namespace soundtrig {

inline constexpr int kSampleRate = 16000;
inline constexpr double kSpeedOfSound = 343.0;
/// Distance floor for the 1/d spreading term.
inline constexpr double kMinPathDistance = 0.1;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  bool operator==(const Waveform&) const = default;
};

struct ImpulseResponse {
  std::vector<double> taps;
  int sample_rate = kSampleRate;
  Vec2 source_pos;
  Vec2 ear_pos;

  double energy() const;
  /// Index of the first nonzero tap, or nullopt for an all-zero response.
  std::optional<std::size_t> first_nonzero() const;
};

struct BinauralFrame {
  Waveform left;
  Waveform right;
  bool clipped = false;

  double duration() const { return left.duration(); }
  bool operator==(const BinauralFrame&) const = default;
};

/// Two point receivers on the axis perpendicular to the heading.
struct EarGeometry {
  double head_width = 0.18;

  Vec2 left_ear(Vec2 base, double heading) const;
  Vec2 right_ear(Vec2 base, double heading) const;
};

struct RirOptions {
  int max_order = 3;
  double max_length = 0.5;  // seconds
  int band = 1;             // absorption band used as a broadband scalar
};

/// One propagation path: delay in samples and linear amplitude.
struct PathTap {
  long delay = 0;
  double amplitude = 0.0;
  int order = 0;
};

/// Every direct/specular path up to max_order, before truncation.
std::vector<PathTap> image_source_paths(const Scene& scene, Vec2 source, Vec2 ear,
                                        const RirOptions& options = {});

/// True when every wall and door lies on the bounds perimeter.
bool is_shoebox(const Scene& scene);

/// Image-source RIR. Uses the lattice enumeration for shoebox scenes and the
/// recursive line-mirroring enumeration otherwise. Throws OutOfBounds.
ImpulseResponse compute_rir(const Scene& scene, Vec2 source, Vec2 ear,
                            const RirOptions& options = {});

/// The two enumerations, exposed so they can be checked against each other.
std::vector<PathTap> image_paths_recursive(const Scene& scene, Vec2 source, Vec2 ear,
                                           const RirOptions& options);
std::vector<PathTap> image_paths_shoebox(const Scene& scene, Vec2 source, Vec2 ear,
                                         const RirOptions& options);

/// Full linear convolution; zero taps are skipped. Throws RateMismatch.
Waveform convolve(const Waveform& source, const ImpulseResponse& rir);

/// Point from which an object radiates. Door-mounted bells sit slightly in
/// front of the leaf so they never lie on a reflecting line.
Vec2 emission_point(const ObjectInstance& object, const Scene& scene);

struct ActiveSource {
  Vec2 position;
  Waveform window;
  int band = 1;
  bool emitting = true;
};

class RirCache;

struct RenderOptions {
  RirOptions rir;
  bool clip = true;
  std::size_t silent_length = kSampleRate;  // frame length when no source is active
  RirCache* cache = nullptr;
};

/// Sum over emitting sources of convolve(window, rir), trimmed to the window
/// length, per ear. With options.clip, samples are hard-clipped to [-1, 1] and
/// frame.clipped reports whether any sample was clipped.
BinauralFrame render_binaural(const Scene& scene, std::span<const ActiveSource> sources,
                              const AgentState& agent, const EarGeometry& ears,
                              const RenderOptions& options = {});

/// Schroeder backward integration; seconds from the first tap to the -60 dB
/// crossing. Throws SilentRIR on a zero-energy response.
double rt60_estimate(const ImpulseResponse& rir);

/// Index (0..3) of the absorption band holding most of the waveform's energy.
int dominant_band(const Waveform& w);

}  // namespace soundtrig
