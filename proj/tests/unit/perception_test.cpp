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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "soundtrig/errors.hpp"
#include "soundtrig/perception.hpp"
#include "soundtrig/rng.hpp"
#include "soundtrig/scene_gen.hpp"

using namespace soundtrig;

namespace {

Waveform sine(double hz, std::size_t n, double amp = 0.5) {
  Waveform w;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = amp * std::sin(2 * std::numbers::pi * hz * i / kSampleRate);
  return w;
}

const SoundBank& bank() {
  static const SoundBank b = synthesize_bank(7);
  return b;
}

const CategoryClassifier& classifier() {
  static const CategoryClassifier c = [] {
    CategoryClassifier k;
    k.fit(bank());
    return k;
  }();
  return c;
}

Scene bare(double w, double h) {
  Scene s;
  s.id = "bare";
  s.bounds = {{0, 0}, {w, h}};
  s.materials = default_materials();
  return s;
}

double rms(const Waveform& w) {
  double e = 0.0;
  for (double x : w.samples) e += x * x;
  return std::sqrt(e / static_cast<double>(w.size()));
}

}  // namespace

TEST(Stft, SinePeaksAtExpectedBin) {
  const Spectrogram s = stft(sine(1000, 4000));
  ASSERT_GT(s.frames(), 0u);
  for (const auto& f : s.magnitudes) {
    EXPECT_EQ(std::max_element(f.begin(), f.end()) - f.begin(), std::lround(1000.0 * 512 / 16000));
  }
}

TEST(Stft, ZeroInputZeroOutput) {
  Waveform z;
  z.samples.assign(2000, 0.0);
  for (const auto& f : stft(z).magnitudes) {
    for (double m : f) EXPECT_EQ(m, 0.0);
  }
}

TEST(Stft, WindowedParseval) {
  Rng rng(1);
  Waveform w;
  w.samples.resize(3000);
  for (auto& x : w.samples) x = rng.uniform(-1, 1);
  const Spectrogram s = stft(w);
  const auto win = hann_window(kStftFrame);
  for (std::size_t f = 0; f < s.frames(); ++f) {
    double time_energy = 0.0;
    for (std::size_t i = 0; i < kStftFrame; ++i) {
      const double v = win[i] * w.samples[f * kStftHop + i];
      time_energy += v * v;
    }
    // One-sided spectrum: interior bins count twice.
    const auto& m = s.magnitudes[f];
    double spec = m.front() * m.front() + m.back() * m.back();
    for (std::size_t k = 1; k + 1 < m.size(); ++k) spec += 2 * m[k] * m[k];
    EXPECT_NEAR(spec / kStftFrame, time_energy, 1e-6 * time_energy);
  }
}

TEST(Mel, FilterbankPartitionOfUnity) {
  const auto fb = mel_filterbank(kMelBands, kStftFrame, kSampleRate, false);
  const double first_center = mel_to_hz(hz_to_mel(0) + (hz_to_mel(kSampleRate / 2.0) - hz_to_mel(0)) / (kMelBands + 1));
  for (std::size_t k = 0; k <= kStftFrame / 2; ++k) {
    const double hz = static_cast<double>(k) * kSampleRate / kStftFrame;
    if (hz < first_center) continue;
    double sum = 0.0;
    for (const auto& row : fb) sum += row[k];
    EXPECT_NEAR(sum, 1.0, 0.01) << k;
  }
}

TEST(Mel, MelScaleRoundTrip) {
  for (double hz : {0.0, 100.0, 1000.0, 8000.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(Mel, FlatSpectrumGivesEqualBands) {
  Spectrogram s;
  s.magnitudes.assign(3, std::vector<double>(kStftFrame / 2 + 1, 1.0));
  const MelSpectrogram m = mel_spectrogram(s);
  for (const auto& row : m.log_energies) {
    for (double e : row) EXPECT_NEAR(std::exp(e), 1.0, 0.01);
  }
}

TEST(Mel, SingleBinTouchesOnlyCoveringBands) {
  Spectrogram s;
  s.magnitudes.assign(1, std::vector<double>(kStftFrame / 2 + 1, 0.0));
  s.magnitudes[0][32] = 1.0;
  const auto fb = mel_filterbank(kMelBands, kStftFrame, kSampleRate, true);
  std::set<int> support;
  for (int b = 0; b < kMelBands; ++b) {
    if (fb[b][32] > 0.0) support.insert(b);
  }
  EXPECT_GE(support.size(), 1u);
  EXPECT_LE(support.size(), 2u);
  const MelSpectrogram m = mel_spectrogram(s);
  for (int b = 0; b < kMelBands; ++b) {
    EXPECT_EQ(m.log_energies[0][b] > std::log(kLogFloor), support.contains(b)) << b;
  }
}

TEST(Mel, DoublingMagnitudeAddsLogFour) {
  const Spectrogram a = stft(sine(700, 3000, 0.2));
  Spectrogram b = a;
  for (auto& f : b.magnitudes) {
    for (double& m : f) m *= 2;
  }
  const auto ma = mel_spectrogram(a), mb = mel_spectrogram(b);
  for (std::size_t f = 0; f < ma.log_energies.size(); ++f) {
    for (int k = 0; k < kMelBands; ++k) {
      if (ma.log_energies[f][k] > std::log(kLogFloor) + 5) {
        EXPECT_NEAR(mb.log_energies[f][k] - ma.log_energies[f][k], std::log(4.0), 1e-9);
      }
    }
  }
}

TEST(Direction, IdenticalChannels) {
  const Waveform w = sine(500, 4000);
  const AudioFeatures f = direction_features({w, w, false});
  EXPECT_TRUE(f.itd_valid);
  EXPECT_EQ(f.itd_samples, 0);
  EXPECT_NEAR(f.ild_db, 0.0, 1e-12);
}

TEST(Direction, DelayedRightChannelMeansLeftLeads) {
  Rng rng(2);
  Waveform l;
  l.samples.resize(4000);
  for (auto& x : l.samples) x = rng.uniform(-0.5, 0.5);
  Waveform r;
  r.samples.assign(8, 0.0);
  r.samples.insert(r.samples.end(), l.samples.begin(), l.samples.end() - 8);
  // Positive means the left channel leads, as for a source on the left.
  EXPECT_EQ(direction_features({l, r, false}).itd_samples, 8);
  EXPECT_EQ(direction_features({r, l, false}).itd_samples, -8);
}

TEST(Direction, SilentFrameFlagged) {
  Waveform z;
  z.samples.assign(1000, 0.0);
  const AudioFeatures f = direction_features({z, z, false});
  EXPECT_FALSE(f.itd_valid);
  EXPECT_EQ(f.itd_samples, 0);
}

TEST(Direction, RenderedSourcesAtPlusMinusNinety) {
  const Scene s = bare(10, 10);
  AgentState a;
  a.base = {5, 5};
  a.heading = 0.3;
  const long expected = std::lround(0.18 / kSpeedOfSound * kSampleRate);
  for (int side : {+1, -1}) {
    ActiveSource src;
    src.position = a.base + heading_vector(a.heading + side * std::numbers::pi / 2) * 2.0;
    Rng rng(3);
    src.window.samples.resize(4000);
    for (auto& x : src.window.samples) x = rng.uniform(-0.5, 0.5);
    const AudioFeatures f = direction_features(render_binaural(s, std::vector{src}, a, EarGeometry{}));
    EXPECT_EQ(f.itd_samples > 0, side > 0);
    EXPECT_NEAR(std::abs(f.itd_samples), expected, 1);
    EXPECT_EQ(f.ild_db > 0, side > 0);
  }
}

TEST(Classifier, UnfittedThrows) {
  CategoryClassifier c;
  EXPECT_THROW(c.classify(sine(440, 16000)), Unfitted);
}

TEST(Classifier, ResubstitutionIsConfident) {
  for (const auto* clip : bank().select(Category::Alarm, Split::Train)) {
    const Classification r = classifier().classify(window_of(*clip, 0));
    EXPECT_EQ(r.category, Category::Alarm) << clip->clip_id;
    EXPECT_GT(r.confidence, 0.9);
  }
}

TEST(Classifier, HeldOutAccuracy) {
  int correct = 0, total = 0;
  for (const auto& clip : bank().clips) {
    if (clip.split != Split::Test) continue;
    for (long t = 0; t < 4; ++t) {
      correct += classifier().classify(window_of(clip, t)).category == clip.category ? 1 : 0;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(correct) / total, 0.95) << correct << "/" << total;
}

TEST(Classifier, EqualLevelMixtureTopTwo) {
  int hits = 0, total = 0;
  for (std::size_t i = 0; i < kSoundCategories.size(); ++i) {
    for (std::size_t j = i + 1; j < kSoundCategories.size(); ++j) {
      const auto a = bank().select(kSoundCategories[i], Split::Test);
      const auto b = bank().select(kSoundCategories[j], Split::Test);
      for (std::size_t k = 0; k < 2; ++k) {
        Waveform wa = window_of(*a[k % a.size()], 0), wb = window_of(*b[k % b.size()], 0);
        const double g = rms(wa) / rms(wb);
        for (std::size_t n = 0; n < wa.size(); ++n) wa.samples[n] = 0.5 * (wa.samples[n] + g * wb.samples[n]);
        const Classification r = classifier().classify(wa);
        const std::set<Category> top{r.ranking[0].first, r.ranking[1].first};
        hits += top == std::set<Category>{kSoundCategories[i], kSoundCategories[j]} ? 1 : 0;
        ++total;
      }
    }
  }
  EXPECT_GE(hits, total - 1) << hits << "/" << total;
}

TEST(Classifier, ExcludeHintFindsSecondSource) {
  const Waveform alarm = window_of(*bank().select(Category::Alarm, Split::Test)[0], 0);
  const Waveform sink = window_of(*bank().select(Category::Sink, Split::Test)[0], 0);
  Waveform mix = alarm;
  const double g = rms(alarm) / rms(sink);
  for (std::size_t n = 0; n < mix.size(); ++n) mix.samples[n] = 0.5 * (alarm.samples[n] + g * sink.samples[n]);
  EXPECT_EQ(classifier().classify(mix, Category::Sink).category, Category::Alarm);
  EXPECT_EQ(classifier().classify(mix, Category::Alarm).category, Category::Sink);
}

TEST(Classifier, SilenceIsFlagged) {
  Waveform z;
  z.samples.assign(16000, 0.0);
  EXPECT_TRUE(classifier().classify(z).silent);
}

TEST(Classifier, JsonRoundTripIsExact) {
  const auto path = std::filesystem::temp_directory_path() / "soundtrig_classifier_test.json";
  classifier().save(path);
  const CategoryClassifier back = CategoryClassifier::load(path);
  std::filesystem::remove(path);
  const Waveform w = window_of(*bank().select(Category::Furby, Split::Test)[0], 1);
  const auto a = classifier().classify(w), b = back.classify(w);
  EXPECT_EQ(a.category, b.category);
  EXPECT_DOUBLE_EQ(a.confidence, b.confidence);
}

TEST(RangeScan, OpenSpaceReturnsMaxRange) {
  const RangeScan s = range_scan(bare(20, 20), {10, 10}, 0.4);
  ASSERT_EQ(s.ranges.size(), 64u);
  for (double r : s.ranges) EXPECT_EQ(r, 5.0);
}

TEST(RangeScan, WallAheadWithinOneCell) {
  Scene s = bare(10, 10);
  s.walls.push_back({{4.0, 0}, {4.0, 10}, "plaster"});
  const RangeScan r = range_scan(s, {2.0, 5.125}, 0.0, 65);
  EXPECT_NEAR(r.ranges[32], 2.0, s.cell_size);
}

TEST(RangeScan, MatchesRayMarchOracle) {
  const Scene s = generate_scene(41, "scan");
  const OccupancyGrid g = build_occupancy_grid(s);
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    Vec2 p;
    do {
      p = {rng.uniform(s.bounds.min.x, s.bounds.max.x), rng.uniform(s.bounds.min.y, s.bounds.max.y)};
    } while (!g.point_free(p));
    const double h = rng.uniform(-3, 3);
    const RangeScan scan = range_scan(g, p, h, 16);
    for (int k = 0; k < 16; ++k) {
      const double a = h + std::numbers::pi / 4 - std::numbers::pi / 2 * k / 15;
      double d = 0.0;
      while (d < 5.0) {
        const auto c = g.cell_of(p + heading_vector(a) * d);
        if (g.blocked(c[0], c[1])) break;
        d += 1e-3;
      }
      EXPECT_NEAR(scan.ranges[k], std::min(d, 5.0), 2e-3) << t << " ray " << k;
    }
  }
}

TEST(RangeScan, MirroredSceneReversesRanges) {
  Scene s = bare(10, 10.25);
  s.walls.push_back({{6.0, 2.0}, {6.0, 7.5}, "plaster"});
  s.walls.push_back({{3.0, 8.0}, {9.0, 8.0}, "plaster"});
  Scene m = s;
  for (auto& w : m.walls) {
    w.a.y = 10.25 - w.a.y;
    w.b.y = 10.25 - w.b.y;
  }
  const Vec2 p{4.125, 5.125};
  const RangeScan a = range_scan(s, p, 0.0);
  const RangeScan b = range_scan(m, p, 0.0);
  for (std::size_t k = 0; k < a.ranges.size(); ++k) EXPECT_NEAR(a.ranges[k], b.ranges[a.ranges.size() - 1 - k], 1e-9);
}
