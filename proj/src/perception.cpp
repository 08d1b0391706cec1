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


#include "soundtrig/perception.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numeric>

#include "soundtrig/errors.hpp"
#include "soundtrig/fft.hpp"

namespace soundtrig {

using nlohmann::json;

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  // Periodic Hann.
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  }
  return w;
}

Spectrogram stft(const Waveform& w, std::size_t frame, std::size_t hop, Channel channel) {
  if (!is_power_of_two(frame)) throw std::invalid_argument("stft: frame must be a power of two");
  if (hop == 0 || hop > frame) throw std::invalid_argument("stft: hop must be in [1, frame]");
  if (w.size() < frame) throw TooShort("stft: waveform shorter than one frame");
  Spectrogram s;
  s.frame = frame;
  s.hop = hop;
  s.sample_rate = w.sample_rate;
  s.channel = channel;
  const auto win = hann_window(frame);
  std::vector<std::complex<double>> buf(frame);
  for (std::size_t start = 0; start + frame <= w.size(); start += hop) {
    for (std::size_t i = 0; i < frame; ++i) buf[i] = w.samples[start + i] * win[i];
    fft_inplace(buf);
    std::vector<double> mag(frame / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
    s.magnitudes.push_back(std::move(mag));
  }
  return s;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(int bands, std::size_t frame, int sample_rate,
                                                bool normalized) {
  if (bands < 2) throw std::invalid_argument("mel_filterbank: need at least two bands");
  const double top = hz_to_mel(sample_rate / 2.0);
  // Band centers split [0, top] into bands + 1 equal mel intervals.
  std::vector<double> centers(bands);
  for (int b = 0; b < bands; ++b) centers[b] = top * (b + 1) / (bands + 1);
  const std::size_t bins = frame / 2 + 1;
  std::vector<std::vector<double>> fb(bands, std::vector<double>(bins, 0.0));
  for (std::size_t k = 0; k < bins; ++k) {
    const double m = hz_to_mel(static_cast<double>(k) * sample_rate / frame);
    if (m <= centers.front()) {
      fb.front()[k] = 1.0;
      continue;
    }
    if (m >= centers.back()) {
      fb.back()[k] = 1.0;
      continue;
    }
    const auto it = std::upper_bound(centers.begin(), centers.end(), m);
    const int hi = static_cast<int>(it - centers.begin());
    const int lo = hi - 1;
    const double t = (m - centers[lo]) / (centers[hi] - centers[lo]);
    fb[lo][k] = 1.0 - t;
    fb[hi][k] = t;
  }
  if (normalized) {
    for (auto& row : fb) {
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      if (sum > 0.0) {
        for (double& v : row) v /= sum;
      }
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Spectrogram& s, int bands) {
  const auto fb = mel_filterbank(bands, s.frame, s.sample_rate, true);
  MelSpectrogram mel;
  mel.band_count = bands;
  for (const auto& frame : s.magnitudes) {
    std::vector<double> row(bands, 0.0);
    for (int b = 0; b < bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < frame.size(); ++k) {
        if (fb[b][k] != 0.0) e += fb[b][k] * frame[k] * frame[k];
      }
      row[b] = std::log(std::max(e, kLogFloor));
    }
    mel.log_energies.push_back(std::move(row));
  }
  return mel;
}

int max_itd_lag(double head_width) {
  return static_cast<int>(std::lround(head_width / kSpeedOfSound * kSampleRate)) + 1;
}

namespace {

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace

AudioFeatures direction_features(const BinauralFrame& frame, double head_width) {
  AudioFeatures f;
  const auto& l = frame.left.samples;
  const auto& r = frame.right.samples;
  const double el = energy(l);
  const double er = energy(r);
  const std::size_t n = std::min(l.size(), r.size());
  if (n > 0) f.level = (el + er) / (2.0 * static_cast<double>(n));
  if (el > 0.0 && er > 0.0) {
    f.ild_db = 10.0 * std::log10(el / er);
    const int lag = max_itd_lag(head_width);
    double best = -std::numeric_limits<double>::infinity();
    // r(tau) = sum L[i] R[i + tau]; a left-leading signal peaks at tau > 0.
    for (int tau = -lag; tau <= lag; ++tau) {
      double c = 0.0;
      const std::size_t lo = tau < 0 ? static_cast<std::size_t>(-tau) : 0;
      const std::size_t hi = tau > 0 ? n - static_cast<std::size_t>(tau) : n;
      for (std::size_t i = lo; i < hi; ++i) c += l[i] * r[i + tau];
      if (c > best || (c == best && std::abs(tau) < std::abs(f.itd_samples))) {
        best = c;
        f.itd_samples = tau;
      }
    }
    f.itd_valid = true;
  }

  // Spectral summary over the sum of both channels' power spectra.
  constexpr std::size_t frame_len = kStftFrame;
  std::vector<double> power(frame_len / 2 + 1, 0.0);
  const auto win = hann_window(frame_len);
  std::vector<std::complex<double>> buf(frame_len);
  for (const auto* ch : {&l, &r}) {
    for (std::size_t start = 0; start + frame_len <= ch->size(); start += frame_len) {
      for (std::size_t i = 0; i < frame_len; ++i) buf[i] = (*ch)[start + i] * win[i];
      fft_inplace(buf);
      for (std::size_t k = 0; k < power.size(); ++k) power[k] += std::norm(buf[k]);
    }
  }
  const std::array<double, kBandCount - 1> edges = {250.0, 1000.0, 4000.0};
  double total = 0.0, weighted = 0.0, log_sum = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double hz = static_cast<double>(k) * kSampleRate / frame_len;
    int band = 0;
    while (band < kBandCount - 1 && hz >= edges[band]) ++band;
    f.band_energies[band] += power[k];
    total += power[k];
    weighted += power[k] * hz;
    log_sum += std::log(power[k] + 1e-20);
  }
  if (total > 0.0) {
    const double m = static_cast<double>(power.size());
    f.spectral_centroid = weighted / total;
    f.spectral_flatness = std::clamp(std::exp(log_sum / m) / (total / m), 0.0, 1.0);
  }
  return f;
}

namespace {

std::vector<double> mean_mel_power(const MelSpectrogram& mel) {
  std::vector<double> v(mel.band_count, 0.0);
  if (mel.log_energies.empty()) return v;
  for (const auto& row : mel.log_energies) {
    for (int b = 0; b < mel.band_count; ++b) {
      // Floor values map back to zero power.
      if (row[b] > std::log(kLogFloor)) v[b] += std::exp(row[b]);
    }
  }
  for (double& x : v) x /= static_cast<double>(mel.log_energies.size());
  return v;
}

std::vector<double> hellinger(std::vector<double> v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(sum > 1e-12)) return {};
  for (double& x : v) x = std::sqrt(x / sum);
  return v;
}

MelSpectrogram mel_of(const Waveform& w) { return mel_spectrogram(stft(w)); }

}  // namespace

std::vector<double> CategoryClassifier::embed(const MelSpectrogram& mel) {
  return hellinger(mean_mel_power(mel));
}

void CategoryClassifier::fit_vectors(
    const std::vector<std::pair<Category, std::vector<double>>>& samples) {
  centroids_.clear();
  for (const auto& s : samples) {
    if (!s.second.empty()) centroids_.push_back(s);
  }
  std::stable_sort(centroids_.begin(), centroids_.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.first) < static_cast<int>(b.first);
  });
}

void CategoryClassifier::fit(const SoundBank& bank, double step_seconds) {
  std::vector<std::pair<Category, std::vector<double>>> samples;
  for (const auto& clip : bank.clips) {
    if (clip.split != Split::Train) continue;
    const long windows = std::max(1L, std::lround(kClipSeconds / step_seconds));
    std::vector<double> power(kMelBands, 0.0);
    for (long t = 0; t < windows; ++t) {
      const auto p = mean_mel_power(mel_of(window_of(clip, t, step_seconds)));
      for (int b = 0; b < kMelBands; ++b) power[b] += p[b];
    }
    auto v = hellinger(std::move(power));
    if (!v.empty()) samples.emplace_back(clip.category, std::move(v));
  }
  fit_vectors(samples);
}

namespace {

// Squared Hellinger-space distance between the mixture m (power, sums to one)
// and the best non-negative blend a*h + b*c of two power templates.
double blend_distance(const std::vector<double>& m, const std::vector<double>& h,
                      const std::vector<double>& c) {
  auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  const double hh = dot(h, h), cc = dot(c, c), hc = dot(h, c), hm = dot(h, m), cm = dot(c, m);
  double a = 0.0, b = 0.0;
  const double det = hh * cc - hc * hc;
  if (det > 1e-18 * hh * cc) {
    a = (hm * cc - cm * hc) / det;
    b = (cm * hh - hm * hc) / det;
  }
  if (!(a >= 0.0 && b >= 0.0)) {
    // One-sided fits; keep whichever leaves the smaller residual.
    const double a1 = std::max(0.0, hm / hh), b1 = std::max(0.0, cm / cc);
    const double r_a = dot(m, m) - 2 * a1 * hm + a1 * a1 * hh;
    const double r_b = dot(m, m) - 2 * b1 * cm + b1 * b1 * cc;
    a = r_a <= r_b ? a1 : 0.0;
    b = r_a <= r_b ? 0.0 : b1;
  }
  std::vector<double> f(m.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    f[i] = a * h[i] + b * c[i];
    sum += f[i];
  }
  if (!(sum > 0.0)) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double e = std::sqrt(m[i]) - std::sqrt(f[i] / sum);
    d += e * e;
  }
  return d;
}

std::vector<double> squared(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * v[i];
  return out;
}

}  // namespace

Classification CategoryClassifier::classify_vector(const std::vector<double>& v, bool silent,
                                                   std::optional<Category> exclude) const {
  if (!fitted()) throw Unfitted("category classifier has not been fitted");
  Classification out;
  out.silent = silent || v.empty();
  const std::vector<double> zero(centroids_.front().second.size(), 0.0);
  const std::vector<double>& x = out.silent ? zero : v;

  std::vector<const std::vector<double>*> hint;
  if (exclude && !out.silent) {
    for (const auto& [cat, c] : centroids_) {
      if (cat == *exclude) hint.push_back(&c);
    }
  }
  const std::vector<double> m = squared(x);
  std::vector<std::pair<Category, double>> d2;
  for (const auto& [cat, c] : centroids_) {
    if (exclude && *exclude == cat) continue;
    double s = 0.0;
    if (hint.empty()) {
      for (std::size_t i = 0; i < c.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    } else {
      const auto pc = squared(c);
      s = std::numeric_limits<double>::infinity();
      for (const auto* h : hint) s = std::min(s, blend_distance(m, squared(*h), pc));
    }
    if (!d2.empty() && d2.back().first == cat) {
      d2.back().second = std::min(d2.back().second, s);
    } else {
      d2.emplace_back(cat, s);
    }
  }
  if (d2.empty()) throw Unfitted("no categories left after exclusion");
  double min_d = std::numeric_limits<double>::infinity();
  for (const auto& p : d2) min_d = std::min(min_d, p.second);
  double z = 0.0;
  for (auto& p : d2) {
    p.second = std::exp(-(p.second - min_d) / kTemperature);
    z += p.second;
  }
  for (auto& p : d2) p.second /= z;
  std::stable_sort(d2.begin(), d2.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  out.ranking = d2;
  out.category = d2.front().first;
  out.confidence = d2.front().second;
  if (!exclude && !out.silent && d2.size() > 2) {
    // Order the runners-up by how well each completes a blend with the winner.
    const Classification rest = classify_vector(v, false, out.category);
    out.ranking.resize(1);
    for (const auto& [cat, p] : rest.ranking) out.ranking.emplace_back(cat, p * (1.0 - out.confidence));
  }
  return out;
}

Classification CategoryClassifier::classify(const MelSpectrogram& mel,
                                            std::optional<Category> exclude) const {
  const auto v = embed(mel);
  return classify_vector(v, v.empty(), exclude);
}

Classification CategoryClassifier::classify(const Waveform& w,
                                            std::optional<Category> exclude) const {
  return classify(mel_of(w), exclude);
}

Classification CategoryClassifier::classify(const BinauralFrame& frame,
                                            std::optional<Category> exclude) const {
  auto l = mean_mel_power(mel_of(frame.left));
  const auto r = mean_mel_power(mel_of(frame.right));
  for (std::size_t i = 0; i < l.size(); ++i) l[i] += r[i];
  const auto v = hellinger(std::move(l));
  return classify_vector(v, v.empty(), exclude);
}

json CategoryClassifier::to_json() const {
  json cents = json::array();
  for (const auto& [cat, c] : centroids_) cents.push_back({{"category", to_string(cat)}, {"centroid", c}});
  return {{"version", 1},
          {"mel", {{"bands", kMelBands}, {"frame", kStftFrame}, {"hop", kStftHop},
                   {"sample_rate", kSampleRate}, {"log_floor", kLogFloor}}},
          {"embedding", "hellinger_mean_mel_power"},
          {"temperature", kTemperature},
          {"centroids", cents}};
}

CategoryClassifier CategoryClassifier::from_json(const json& j) {
  CategoryClassifier c;
  try {
    for (const auto& e : j.at("centroids")) {
      c.centroids_.emplace_back(category_from_string(e.at("category").get<std::string>()),
                                e.at("centroid").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("classifier json: ") + e.what());
  }
  return c;
}

void CategoryClassifier::save(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot write " + path.string());
  f << to_json().dump(2) << '\n';
}

CategoryClassifier CategoryClassifier::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("classifier json: ") + e.what());
  }
  return from_json(j);
}

RangeScan range_scan(const OccupancyGrid& grid, Vec2 pose, double heading, int ray_count,
                     double fov, double max_range) {
  RangeScan scan;
  scan.max_range = max_range;
  scan.fov = fov;
  scan.ranges.resize(ray_count, max_range);
  const double cs = grid.cell_size();
  const Vec2 o = grid.origin();
  for (int r = 0; r < ray_count; ++r) {
    // Ray 0 is the leftmost.
    const double a = ray_count == 1 ? heading : heading + fov / 2 - fov * r / (ray_count - 1);
    const Vec2 d = heading_vector(a);
    auto [i, j] = grid.cell_of(pose);
    if (grid.blocked(i, j)) {
      scan.ranges[r] = 1e-6;
      continue;
    }
    // Amanatides-Woo traversal.
    const int si = d.x > 0 ? 1 : -1;
    const int sj = d.y > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    const double next_x = o.x + (i + (si > 0 ? 1 : 0)) * cs;
    const double next_y = o.y + (j + (sj > 0 ? 1 : 0)) * cs;
    double tx = std::abs(d.x) < 1e-12 ? inf : (next_x - pose.x) / d.x;
    double ty = std::abs(d.y) < 1e-12 ? inf : (next_y - pose.y) / d.y;
    const double dtx = std::abs(d.x) < 1e-12 ? inf : cs / std::abs(d.x);
    const double dty = std::abs(d.y) < 1e-12 ? inf : cs / std::abs(d.y);
    double t = 0.0;
    while (t < max_range) {
      if (tx < ty) {
        t = tx;
        tx += dtx;
        i += si;
      } else {
        t = ty;
        ty += dty;
        j += sj;
      }
      if (t >= max_range) break;
      if (grid.blocked(i, j)) {
        scan.ranges[r] = std::max(t, 1e-6);
        break;
      }
    }
  }
  return scan;
}

RangeScan range_scan(const Scene& scene, Vec2 pose, double heading, int ray_count, double fov,
                     double max_range) {
  return range_scan(build_occupancy_grid(scene), pose, heading, ray_count, fov, max_range);
}

}  // namespace soundtrig
