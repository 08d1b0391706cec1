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

#include <cmath>
#include <numbers>
#include <optional>

namespace soundtrig {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Unit vector for a heading in radians.
inline Vec2 heading_vector(double heading) {
  return {std::cos(heading), std::sin(heading)};
}

/// Axis-aligned rectangle; min is the lower-left corner.
struct Rect {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(min.x + max.x) / 2, (min.y + max.y) / 2}; }
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  bool contains(const Rect& r) const { return contains(r.min) && contains(r.max); }
  bool operator==(const Rect&) const = default;
};

/// True when the two rectangles share a region of positive area.
bool overlaps_with_area(const Rect& a, const Rect& b);

/// Rectangle covering a segment thickened by `half_thickness` on both sides.
/// Only meaningful for axis-aligned segments.
Rect thicken_segment(Vec2 a, Vec2 b, double half_thickness);

/// Parameter t in (eps, 1 - eps) along p->q where it properly crosses the
/// segment a->b (the crossing point may lie on a or b); nullopt otherwise.
std::optional<double> segment_crossing(Vec2 p, Vec2 q, Vec2 a, Vec2 b,
                                       double eps = 1e-9);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace soundtrig
