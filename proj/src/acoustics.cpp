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

#include "soundtrig/acoustics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "soundtrig/errors.hpp"
#include "soundtrig/fft.hpp"
#include "soundtrig/rir_cache.hpp"

namespace soundtrig {

double ImpulseResponse::energy() const {
  double e = 0.0;
  for (double t : taps) e += t * t;
  return e;
}

std::optional<std::size_t> ImpulseResponse::first_nonzero() const {
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] != 0.0) return i;
  }
  return std::nullopt;
}

Vec2 EarGeometry::left_ear(Vec2 base, double heading) const {
  const Vec2 f = heading_vector(heading);
  return base + Vec2{-f.y, f.x} * (head_width / 2);
}

Vec2 EarGeometry::right_ear(Vec2 base, double heading) const {
  const Vec2 f = heading_vector(heading);
  return base - Vec2{-f.y, f.x} * (head_width / 2);
}

namespace {

struct Span {
  double lo;
  double hi;
  const MaterialProperties* material;
};

// Infinite reflecting line x = c (vertical) or y = c, with the wall/door
// spans that actually lie on it.
struct ReflectorLine {
  bool vertical;
  double c;
  std::vector<Span> spans;

  Vec2 mirror(Vec2 p) const {
    return vertical ? Vec2{2 * c - p.x, p.y} : Vec2{p.x, 2 * c - p.y};
  }
  double normal_coord(Vec2 p) const { return vertical ? p.x : p.y; }
  double along_coord(Vec2 p) const { return vertical ? p.y : p.x; }

  const Span* span_at(Vec2 p) const {
    const double s = along_coord(p);
    for (const auto& sp : spans) {
      if (s >= sp.lo - 1e-9 && s <= sp.hi + 1e-9) return &sp;
    }
    return nullptr;
  }
};

struct Occluder {
  Vec2 a;
  Vec2 b;
  const MaterialProperties* material;
};

struct Geometry {
  std::vector<ReflectorLine> lines;
  std::vector<Occluder> occluders;
};

Geometry collect_geometry(const Scene& scene) {
  Geometry g;
  auto add = [&](Vec2 a, Vec2 b, const std::string& material) {
    const MaterialProperties* m = &scene.materials.at(material);
    g.occluders.push_back({a, b, m});
    const bool vertical = a.x == b.x;
    const double c = vertical ? a.x : a.y;
    const double lo = vertical ? std::min(a.y, b.y) : std::min(a.x, b.x);
    const double hi = vertical ? std::max(a.y, b.y) : std::max(a.x, b.x);
    for (auto& line : g.lines) {
      if (line.vertical == vertical && line.c == c) {
        line.spans.push_back({lo, hi, m});
        return;
      }
    }
    g.lines.push_back({vertical, c, {{lo, hi, m}}});
  };
  for (const auto& w : scene.walls) add(w.a, w.b, w.material);
  for (const auto& d : scene.doors) add(d.hinge, d.leaf_end, d.material);
  return g;
}

double occlusion_gain(const Geometry& g, Vec2 p, Vec2 q, int band) {
  double gain = 1.0;
  for (const auto& o : g.occluders) {
    if (segment_crossing(p, q, o.a, o.b)) {
      gain *= o.material->transmission[band];
      if (gain == 0.0) return 0.0;
    }
  }
  return gain;
}

long delay_samples(double d) {
  return std::lround(d / kSpeedOfSound * kSampleRate);
}

double spreading(double d) { return 1.0 / std::max(d, kMinPathDistance); }

void check_inside(const Scene& scene, Vec2 p, const char* what) {
  if (!scene.bounds.contains(p)) {
    throw OutOfBounds(std::string(what) + " lies outside scene " + scene.id);
  }
}

// Reflection sequence validation from the ear back to the source.
std::optional<PathTap> trace_images(const Geometry& g, const std::vector<Vec2>& images,
                                    const std::vector<int>& seq, Vec2 ear, int band) {
  const int k = static_cast<int>(seq.size());
  std::vector<Vec2> points{ear};
  double gain = 1.0;
  Vec2 from = ear;
  for (int m = k; m >= 1; --m) {
    const ReflectorLine& line = g.lines[seq[m - 1]];
    const Vec2 target = images[m];
    const double a = line.normal_coord(from) - line.c;
    const double b = line.normal_coord(target) - line.c;
    if (a * b >= 0.0) return std::nullopt;
    const double t = a / (a - b);
    if (t <= 1e-9 || t >= 1.0 - 1e-9) return std::nullopt;
    const Vec2 hit = from + (target - from) * t;
    const Span* span = line.span_at(hit);
    if (span == nullptr) return std::nullopt;
    gain *= std::sqrt(1.0 - span->material->absorption[band]);
    points.push_back(hit);
    from = hit;
  }
  points.push_back(images[0]);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    gain *= occlusion_gain(g, points[i], points[i + 1], band);
    if (gain == 0.0) return std::nullopt;
  }
  const double d = distance(ear, images[k]);
  return PathTap{delay_samples(d), spreading(d) * gain, k};
}

void enumerate(const Geometry& g, std::vector<Vec2>& images, std::vector<int>& seq, Vec2 ear,
               const RirOptions& opt, std::vector<PathTap>& out) {
  if (auto tap = trace_images(g, images, seq, ear, opt.band)) out.push_back(*tap);
  if (static_cast<int>(seq.size()) >= opt.max_order) return;
  for (int l = 0; l < static_cast<int>(g.lines.size()); ++l) {
    if (!seq.empty() && seq.back() == l) continue;
    const Vec2 img = g.lines[l].mirror(images.back());
    if (distance(img, images.back()) < 1e-9) continue;  // image lies on the line
    images.push_back(img);
    seq.push_back(l);
    enumerate(g, images, seq, ear, opt, out);
    images.pop_back();
    seq.pop_back();
  }
}

// Fold an unfolded coordinate back into [0, len].
double fold(double v, double len) {
  double r = std::fmod(v, 2 * len);
  if (r < 0) r += 2 * len;
  return r <= len ? r : 2 * len - r;
}

// Image coordinate after |k| reflections between walls at 0 and len.
double lattice_image(double s, long k, double len) {
  const long pairs = (k >= 0) ? (k + 1) / 2 : -((-k) / 2);
  return 2.0 * pairs * len + ((k % 2 == 0) ? s : -s);
}

}  // namespace

bool is_shoebox(const Scene& scene) {
  const Rect& b = scene.bounds;
  auto on_perimeter = [&](Vec2 p, Vec2 q) {
    if (p.x == q.x) return p.x == b.min.x || p.x == b.max.x;
    return p.y == b.min.y || p.y == b.max.y;
  };
  for (const auto& w : scene.walls) {
    if (!on_perimeter(w.a, w.b)) return false;
  }
  for (const auto& d : scene.doors) {
    if (!on_perimeter(d.hinge, d.leaf_end)) return false;
  }
  return !scene.walls.empty();
}

std::vector<PathTap> image_paths_recursive(const Scene& scene, Vec2 source, Vec2 ear,
                                           const RirOptions& options) {
  const Geometry g = collect_geometry(scene);
  std::vector<Vec2> images{source};
  std::vector<int> seq;
  std::vector<PathTap> out;
  enumerate(g, images, seq, ear, options, out);
  return out;
}

std::vector<PathTap> image_paths_shoebox(const Scene& scene, Vec2 source, Vec2 ear,
                                         const RirOptions& options) {
  const Geometry g = collect_geometry(scene);
  const Rect& b = scene.bounds;
  const double w = b.width();
  const double h = b.height();
  const Vec2 s = source - b.min;
  const Vec2 e = ear - b.min;
  auto find_line = [&](bool vertical, double c) -> const ReflectorLine* {
    for (const auto& l : g.lines) {
      if (l.vertical == vertical && l.c == c) return &l;
    }
    return nullptr;
  };
  std::array<const ReflectorLine*, 4> walls = {
      find_line(true, b.min.x), find_line(true, b.max.x),
      find_line(false, b.min.y), find_line(false, b.max.y)};

  std::vector<PathTap> out;
  const long n = options.max_order;
  for (long kx = -n; kx <= n; ++kx) {
    for (long ky = -(n - std::abs(kx)); ky <= n - std::abs(kx); ++ky) {
      const Vec2 img{lattice_image(s.x, kx, w), lattice_image(s.y, ky, h)};
      const Vec2 dir = img - e;
      double gain = 1.0;
      bool valid = true;
      // Crossings with x = j*w.
      auto cross = [&](long count, bool vertical) {
        const long step = count > 0 ? 1 : -1;
        for (long c = 0; c < std::abs(count) && valid; ++c) {
          const long j = count > 0 ? c + 1 : -c;
          const double coord = j * (vertical ? w : h);
          const double t = (coord - (vertical ? e.x : e.y)) / (vertical ? dir.x : dir.y);
          const Vec2 unfolded = e + dir * t;
          const double along = vertical ? fold(unfolded.y, h) : fold(unfolded.x, w);
          const bool at_max = ((j % 2) + 2) % 2 == 1;
          const ReflectorLine* line = walls[(vertical ? 0 : 2) + (at_max ? 1 : 0)];
          const Vec2 hit = vertical ? Vec2{0, along + b.min.y} : Vec2{along + b.min.x, 0};
          const Span* span = line ? line->span_at(hit) : nullptr;
          if (span == nullptr) {
            valid = false;
          } else {
            gain *= std::sqrt(1.0 - span->material->absorption[options.band]);
          }
        }
        (void)step;
      };
      cross(kx, true);
      cross(ky, false);
      if (!valid) continue;
      const double d = dir.norm();
      out.push_back({delay_samples(d), spreading(d) * gain, static_cast<int>(std::abs(kx) + std::abs(ky))});
    }
  }
  return out;
}

std::vector<PathTap> image_source_paths(const Scene& scene, Vec2 source, Vec2 ear,
                                        const RirOptions& options) {
  check_inside(scene, source, "source");
  check_inside(scene, ear, "ear");
  if (options.max_order < 0) throw std::invalid_argument("max_order must be >= 0");
  if (is_shoebox(scene)) return image_paths_shoebox(scene, source, ear, options);
  return image_paths_recursive(scene, source, ear, options);
}

ImpulseResponse compute_rir(const Scene& scene, Vec2 source, Vec2 ear, const RirOptions& options) {
  const auto paths = image_source_paths(scene, source, ear, options);
  ImpulseResponse rir;
  rir.sample_rate = kSampleRate;
  rir.source_pos = source;
  rir.ear_pos = ear;
  const auto length = static_cast<std::size_t>(std::ceil(options.max_length * kSampleRate - 1e-9));
  rir.taps.assign(length, 0.0);
  for (const auto& p : paths) {
    if (p.delay >= 0 && static_cast<std::size_t>(p.delay) < length) rir.taps[p.delay] += p.amplitude;
  }
  return rir;
}

Waveform convolve(const Waveform& source, const ImpulseResponse& rir) {
  if (source.sample_rate != rir.sample_rate) {
    throw RateMismatch("convolve: source and RIR sample rates differ");
  }
  Waveform out;
  out.sample_rate = source.sample_rate;
  if (source.samples.empty() || rir.taps.empty()) return out;
  out.samples.assign(source.size() + rir.taps.size() - 1, 0.0);
  const std::size_t n = source.size();
  for (std::size_t k = 0; k < rir.taps.size(); ++k) {
    const double h = rir.taps[k];
    if (h == 0.0) continue;
    double* dst = out.samples.data() + k;
    const double* src = source.samples.data();
    for (std::size_t i = 0; i < n; ++i) dst[i] += h * src[i];
  }
  return out;
}

Vec2 emission_point(const ObjectInstance& object, const Scene& scene) {
  if (object.category == Category::Doorbell) {
    if (const DoorSpec* door = scene.find_door(object.bound_to)) {
      return door->handle + door->front_normal() * 0.05;
    }
  }
  return object.position;
}

BinauralFrame render_binaural(const Scene& scene, std::span<const ActiveSource> sources,
                              const AgentState& agent, const EarGeometry& ears,
                              const RenderOptions& options) {
  std::size_t length = 0;
  bool have_length = false;
  for (const auto& s : sources) {
    if (!s.emitting) continue;
    if (!have_length) {
      length = s.window.size();
      have_length = true;
    } else if (s.window.size() != length) {
      throw std::invalid_argument("render_binaural: source windows differ in length");
    }
  }
  if (!have_length) length = options.silent_length;

  BinauralFrame frame;
  frame.left.samples.assign(length, 0.0);
  frame.right.samples.assign(length, 0.0);
  const Vec2 left = ears.left_ear(agent.base, agent.heading);
  const Vec2 right = ears.right_ear(agent.base, agent.heading);
  for (const auto& s : sources) {
    if (!s.emitting) continue;
    RirOptions opt = options.rir;
    opt.band = s.band;
    for (int ch = 0; ch < 2; ++ch) {
      const Vec2 ear = ch == 0 ? left : right;
      const ImpulseResponse rir = options.cache ? options.cache->get(scene, s.position, ear, opt)
                                                : compute_rir(scene, s.position, ear, opt);
      const Waveform wet = convolve(s.window, rir);
      auto& dst = ch == 0 ? frame.left.samples : frame.right.samples;
      for (std::size_t i = 0; i < length; ++i) dst[i] += wet.samples[i];
    }
  }
  if (options.clip) {
    for (auto* ch : {&frame.left.samples, &frame.right.samples}) {
      for (double& x : *ch) {
        if (x > 1.0 || x < -1.0) {
          frame.clipped = true;
          x = std::clamp(x, -1.0, 1.0);
        }
      }
    }
  }
  return frame;
}

double rt60_estimate(const ImpulseResponse& rir) {
  const double total = rir.energy();
  if (!(total > 0.0)) throw SilentRIR("rt60_estimate: RIR has zero energy");
  const std::size_t first = *rir.first_nonzero();
  // Energy remaining strictly after sample n.
  double remaining = total;
  for (std::size_t n = 0; n < rir.taps.size(); ++n) {
    remaining -= rir.taps[n] * rir.taps[n];
    if (n >= first && remaining <= total * 1e-6) {
      return static_cast<double>(n - first) / rir.sample_rate;
    }
  }
  return static_cast<double>(rir.taps.size()) / rir.sample_rate;
}

int dominant_band(const Waveform& w) {
  constexpr std::size_t frame = 512;
  std::array<double, kBandCount> energy{};
  const std::array<double, kBandCount - 1> edges = {250.0, 1000.0, 4000.0};
  for (std::size_t start = 0; start + frame <= w.size(); start += frame) {
    const auto mag = magnitude_spectrum(std::span(w.samples).subspan(start, frame));
    for (std::size_t k = 0; k < mag.size(); ++k) {
      const double f = static_cast<double>(k) * w.sample_rate / frame;
      int band = 0;
      while (band < kBandCount - 1 && f >= edges[band]) ++band;
      energy[band] += mag[k] * mag[k];
    }
  }
  return static_cast<int>(std::max_element(energy.begin(), energy.end()) - energy.begin());
}

}  // namespace soundtrig
