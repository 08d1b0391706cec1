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

#include "soundtrig/geometry.hpp"

#include <algorithm>

namespace soundtrig {

bool overlaps_with_area(const Rect& a, const Rect& b) {
  const double ox = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  const double oy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  return ox > 1e-12 && oy > 1e-12;
}

Rect thicken_segment(Vec2 a, Vec2 b, double half_thickness) {
  Rect r{{std::min(a.x, b.x), std::min(a.y, b.y)},
         {std::max(a.x, b.x), std::max(a.y, b.y)}};
  if (a.y == b.y) {
    r.min.y -= half_thickness;
    r.max.y += half_thickness;
  } else {
    r.min.x -= half_thickness;
    r.max.x += half_thickness;
  }
  return r;
}

std::optional<double> segment_crossing(Vec2 p, Vec2 q, Vec2 a, Vec2 b, double eps) {
  const Vec2 r = q - p;
  const Vec2 s = b - a;
  const double denom = r.cross(s);
  if (std::abs(denom) < 1e-15) return std::nullopt;  // parallel
  const Vec2 ap = a - p;
  const double t = ap.cross(s) / denom;
  const double u = ap.cross(r) / denom;
  if (t <= eps || t >= 1.0 - eps) return std::nullopt;
  if (u < -eps || u > 1.0 + eps) return std::nullopt;
  return t;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

}  // namespace soundtrig
