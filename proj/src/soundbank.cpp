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


#include "soundtrig/soundbank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "soundtrig/errors.hpp"
#include "soundtrig/fft.hpp"
#include "soundtrig/rng.hpp"
#include "soundtrig/wav.hpp"

namespace soundtrig {

using nlohmann::json;

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split: " + std::string(s));
}

int bank_count(Category c, Split s) {
  const bool train = s == Split::Train;
  switch (c) {
    case Category::Alarm: return train ? 11 : 5;
    case Category::Furby: return train ? 30 : 14;
    case Category::Phone: return train ? 19 : 9;
    case Category::Sink: return train ? 6 : 3;
    case Category::Doorbell: return train ? 11 : 5;
    case Category::Distractor: return 0;
  }
  return 0;
}

const SoundClip* SoundBank::find(std::string_view clip_id) const {
  for (const auto& c : clips) {
    if (c.clip_id == clip_id) return &c;
  }
  return nullptr;
}

const SoundClip& SoundBank::at(std::string_view clip_id) const {
  if (const SoundClip* c = find(clip_id)) return *c;
  throw FormatError("unknown clip id: " + std::string(clip_id));
}

std::vector<const SoundClip*> SoundBank::select(Category c, Split s) const {
  std::vector<const SoundClip*> out;
  for (const auto& clip : clips) {
    if (clip.category == c && clip.split == s) out.push_back(&clip);
  }
  return out;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t clip_samples() { return static_cast<std::size_t>(kClipSeconds * kSampleRate); }

double rnd(Rng& rng, double lo, double hi) {
  // Rounded so the manifest reproduces the parameters exactly.
  return std::round(rng.uniform(lo, hi) * 1e4) / 1e4;
}

// Band-limited square wave: odd harmonics below Nyquist.
std::vector<double> alarm(Rng& rng, json& p) {
  p["freq_hz"] = rnd(rng, 1800, 2400);
  p["period_s"] = rnd(rng, 0.12, 0.35);
  p["duty"] = rnd(rng, 0.4, 0.65);
  p["phase_s"] = rnd(rng, 0.0, 0.1);
  const double f = p["freq_hz"], period = p["period_s"], duty = p["duty"], ph = p["phase_s"];
  std::vector<double> x(clip_samples());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / kSampleRate;
    if (std::fmod(t + ph, period) >= duty * period) continue;
    double s = 0.0;
    for (int h = 1; h * f < kSampleRate / 2.0; h += 2) s += std::sin(kTwoPi * h * f * t) / h;
    x[n] = s;
  }
  return x;
}

std::vector<double> phone(Rng& rng, json& p) {
  p["f1_hz"] = rnd(rng, 420, 460);
  p["f2_offset_hz"] = rnd(rng, 35, 50);
  p["on_s"] = rnd(rng, 0.3, 0.6);
  p["off_s"] = rnd(rng, 0.08, 0.25);
  p["trill_hz"] = rnd(rng, 15, 25);
  const double f1 = p["f1_hz"], f2 = f1 + p["f2_offset_hz"].get<double>();
  const double on = p["on_s"], off = p["off_s"], trill = p["trill_hz"];
  std::vector<double> x(clip_samples());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / kSampleRate;
    if (std::fmod(t, on + off) >= on) continue;
    const double am = 0.75 + 0.25 * std::sin(kTwoPi * trill * t);
    x[n] = am * (std::sin(kTwoPi * f1 * t) + std::sin(kTwoPi * f2 * t));
  }
  return x;
}

// FM warble with a second harmonic and syllabic amplitude envelope.
std::vector<double> furby(Rng& rng, json& p) {
  p["carrier_hz"] = rnd(rng, 700, 1300);
  p["mod_hz"] = rnd(rng, 4, 9);
  p["deviation_hz"] = rnd(rng, 120, 380);
  p["syllable_hz"] = rnd(rng, 2.5, 5.5);
  p["harmonic"] = rnd(rng, 0.2, 0.5);
  const double fc = p["carrier_hz"], fm = p["mod_hz"], dev = p["deviation_hz"];
  const double syl = p["syllable_hz"], h2 = p["harmonic"];
  std::vector<double> x(clip_samples());
  double phase = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / kSampleRate;
    const double inst = fc + dev * std::sin(kTwoPi * fm * t);
    phase += kTwoPi * inst / kSampleRate;
    const double env = 0.35 + 0.65 * std::pow(std::sin(std::numbers::pi * syl * t), 2);
    x[n] = env * (std::sin(phase) + h2 * std::sin(2 * phase));
  }
  return x;
}

// White noise through a one-pole high-pass and a two-stage one-pole low-pass.
std::vector<double> sink(Rng& rng, json& p) {
  p["low_cut_hz"] = rnd(rng, 150, 500);
  p["high_cut_hz"] = rnd(rng, 4000, 7000);
  p["flutter_hz"] = rnd(rng, 0.5, 3.0);
  p["noise_seed"] = rng.next_u64() & 0xffffffffu;
  const double lo = p["low_cut_hz"], hi = p["high_cut_hz"], flutter = p["flutter_hz"];
  Rng noise(p["noise_seed"].get<std::uint64_t>());
  const double a_hp = std::exp(-kTwoPi * lo / kSampleRate);
  const double a_lp = std::exp(-kTwoPi * hi / kSampleRate);
  std::vector<double> x(clip_samples());
  double hp_prev_in = 0, hp_prev_out = 0, lp1 = 0, lp2 = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / kSampleRate;
    const double v = noise.uniform(-1.0, 1.0);
    const double hp = a_hp * (hp_prev_out + v - hp_prev_in);
    hp_prev_in = v;
    hp_prev_out = hp;
    lp1 = (1 - a_lp) * hp + a_lp * lp1;
    lp2 = (1 - a_lp) * lp1 + a_lp * lp2;
    x[n] = lp2 * (0.85 + 0.15 * std::sin(kTwoPi * flutter * t));
  }
  return x;
}

// Two decaying notes ("ding-dong") repeated.
std::vector<double> doorbell(Rng& rng, json& p) {
  p["f1_hz"] = rnd(rng, 620, 900);
  p["ratio"] = rnd(rng, 0.76, 0.84);
  p["decay_s"] = rnd(rng, 0.25, 0.5);
  p["gap_s"] = rnd(rng, 0.35, 0.55);
  p["repeat_s"] = rnd(rng, 1.1, 1.6);
  const double f1 = p["f1_hz"], f2 = f1 * p["ratio"].get<double>();
  const double tau = p["decay_s"], gap = p["gap_s"], rep = p["repeat_s"];
  std::vector<double> x(clip_samples());
  auto note = [&](double f, double dt) {
    if (dt < 0) return 0.0;
    return std::exp(-dt / tau) * (std::sin(kTwoPi * f * dt) + 0.3 * std::sin(kTwoPi * 2.76 * f * dt));
  };
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = std::fmod(static_cast<double>(n) / kSampleRate, rep);
    x[n] = note(f1, t) + note(f2, t - gap);
  }
  return x;
}

void peak_normalize(std::vector<double>& x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return;
  const double g = kPeakAmplitude / peak;
  for (double& v : x) v *= g;
}

std::string clip_id(Category c, Split s, int index) {
  std::string name(to_string(c));
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", index);
  return name + "_" + std::string(to_string(s)) + "_" + buf;
}

}  // namespace

SoundBank synthesize_bank(std::uint64_t seed) {
  SoundBank bank;
  bank.seed = seed;
  for (Category c : kSoundCategories) {
    std::vector<json> seen;
    for (Split s : {Split::Train, Split::Test}) {
      for (int i = 0; i < bank_count(c, s); ++i) {
        Rng rng(derive_seed(seed, std::string("clip/") + clip_id(c, s, i)));
        SoundClip clip;
        clip.clip_id = clip_id(c, s, i);
        clip.category = c;
        clip.split = s;
        std::vector<double> x;
        // Redraw on the (practically impossible) event of a parameter clash.
        do {
          clip.params = json::object();
          switch (c) {
            case Category::Alarm: x = alarm(rng, clip.params); break;
            case Category::Phone: x = phone(rng, clip.params); break;
            case Category::Furby: x = furby(rng, clip.params); break;
            case Category::Sink: x = sink(rng, clip.params); break;
            case Category::Doorbell: x = doorbell(rng, clip.params); break;
            case Category::Distractor: break;
          }
        } while (std::find(seen.begin(), seen.end(), clip.params) != seen.end());
        seen.push_back(clip.params);
        peak_normalize(x);
        clip.waveform.samples = std::move(x);
        bank.clips.push_back(std::move(clip));
      }
    }
  }
  return bank;
}

Waveform window_of(const SoundClip& clip, long t_step, double step_seconds) {
  if (!(step_seconds > 0.0)) throw std::invalid_argument("window_of: step must be positive");
  const auto len = static_cast<std::size_t>(std::llround(step_seconds * clip.waveform.sample_rate));
  const std::size_t n = clip.waveform.size();
  Waveform w;
  w.sample_rate = clip.waveform.sample_rate;
  w.samples.resize(len);
  if (n == 0) return w;
  const long long start = static_cast<long long>(t_step) * static_cast<long long>(len);
  long long idx = start % static_cast<long long>(n);
  if (idx < 0) idx += static_cast<long long>(n);
  for (std::size_t i = 0; i < len; ++i) {
    w.samples[i] = clip.waveform.samples[static_cast<std::size_t>(idx)];
    if (++idx == static_cast<long long>(n)) idx = 0;
  }
  return w;
}

json bank_manifest(const SoundBank& bank) {
  json clips = json::array();
  for (const auto& c : bank.clips) {
    clips.push_back({{"clip_id", c.clip_id},
                     {"category", to_string(c.category)},
                     {"split", to_string(c.split)},
                     {"loop", c.loop},
                     {"samples", c.waveform.size()},
                     {"sample_rate", c.waveform.sample_rate},
                     {"params", c.params}});
  }
  return {{"seed", bank.seed}, {"clips", clips}};
}

void write_bank(const SoundBank& bank, const std::filesystem::path& dir, bool with_wavs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create " + dir.string());
  std::ofstream f(dir / "bank.json");
  if (!f) throw IoFailure("cannot write " + (dir / "bank.json").string());
  f << bank_manifest(bank).dump(2) << '\n';
  if (with_wavs) {
    for (const auto& c : bank.clips) write_wav(dir / (c.clip_id + ".wav"), c.waveform);
  }
}

double spectral_flatness(const Waveform& w) {
  constexpr std::size_t frame = 512;
  std::vector<double> power(frame / 2 + 1, 0.0);
  for (std::size_t start = 0; start + frame <= w.size(); start += frame) {
    const auto mag = magnitude_spectrum(std::span(w.samples).subspan(start, frame));
    for (std::size_t k = 0; k < mag.size(); ++k) power[k] += mag[k] * mag[k];
  }
  double log_sum = 0.0, sum = 0.0;
  for (double p : power) {
    log_sum += std::log(p + 1e-20);
    sum += p;
  }
  const double n = static_cast<double>(power.size());
  if (sum <= 0.0) return 0.0;
  return std::clamp(std::exp(log_sum / n) / (sum / n), 0.0, 1.0);
}

}  // namespace soundtrig
