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

#include "soundtrig/scene_gen.hpp"

#include <algorithm>
#include <cmath>

#include "soundtrig/rng.hpp"

namespace soundtrig {

std::map<std::string, MaterialProperties> default_materials() {
  std::map<std::string, MaterialProperties> m;
  m["plaster"] = {{0.12, 0.10, 0.06, 0.05}, {0.02, 0.01, 0.0, 0.0}};
  m["concrete"] = {{0.01, 0.02, 0.02, 0.03}, {0.0, 0.0, 0.0, 0.0}};
  m["brick"] = {{0.03, 0.03, 0.05, 0.07}, {0.0, 0.0, 0.0, 0.0}};
  m["wood_door"] = {{0.14, 0.10, 0.06, 0.08}, {0.10, 0.05, 0.02, 0.01}};
  m["curtain"] = {{0.30, 0.45, 0.65, 0.55}, {0.20, 0.15, 0.10, 0.10}};
  return m;
}

Scene make_empty_room(const std::string& id, double width, double height,
                      const std::string& material) {
  Scene s;
  s.id = id;
  s.bounds = {{0, 0}, {width, height}};
  s.materials = default_materials();
  s.walls = {{{0, 0}, {width, 0}, material},
             {{width, 0}, {width, height}, material},
             {{width, height}, {0, height}, material},
             {{0, height}, {0, 0}, material}};
  return s;
}

namespace {

double snap(double v, double q = 0.25) { return std::round(v / q) * q; }

struct Side {
  Vec2 a;  // corner
  Vec2 dir;
  double length;
};

// Door span along a perimeter side, as distances from side.a.
struct DoorSlot {
  int side;
  double from;
  double to;
};

}  // namespace

Scene generate_scene(std::uint64_t seed, const std::string& id) {
  Rng rng(seed);
  Scene s;
  s.id = id;
  const double width = 6.0 + 0.5 * static_cast<double>(rng.index(5));
  const double height = 5.5 + 0.5 * static_cast<double>(rng.index(5));
  s.bounds = {{0, 0}, {width, height}};
  s.cell_size = 0.25;
  s.materials = default_materials();
  const std::array<std::string, 3> wall_materials = {"plaster", "concrete", "brick"};
  const std::string wall_material = wall_materials[rng.index(wall_materials.size())];

  const std::array<Side, 4> sides = {Side{{0, 0}, {1, 0}, width},
                                     Side{{width, 0}, {0, 1}, height},
                                     Side{{width, height}, {-1, 0}, width},
                                     Side{{0, height}, {0, -1}, height}};

  // Optional partition parallel to the y axis, open at one end.
  std::optional<Wall> partition;
  double partition_x = 0.0;
  if (rng.bernoulli(0.5)) {
    partition_x = snap(width / 2 + rng.uniform(-1.0, 1.0), 0.5);
    const double gap = 1.5;
    if (rng.bernoulli(0.5)) {
      partition = Wall{{partition_x, 0}, {partition_x, height - gap}, "plaster"};
    } else {
      partition = Wall{{partition_x, gap}, {partition_x, height}, "plaster"};
    }
  }

  // Two exterior doors, 1 m wide, kept clear of corners and the partition.
  std::vector<DoorSlot> slots;
  for (int attempt = 0; attempt < 200 && slots.size() < 2; ++attempt) {
    const int side = static_cast<int>(rng.index(4));
    const double len = sides[side].length;
    const double from = snap(rng.uniform(0.75, len - 1.75));
    DoorSlot slot{side, from, from + 1.0};
    bool ok = true;
    for (const auto& o : slots) {
      if (o.side == side && slot.from < o.to + 0.75 && o.from < slot.to + 0.75) ok = false;
    }
    if (partition && (side == 0 || side == 2)) {
      const Vec2 p0 = sides[side].a + sides[side].dir * slot.from;
      const Vec2 p1 = sides[side].a + sides[side].dir * slot.to;
      const double lo = std::min(p0.x, p1.x) - 0.75;
      const double hi = std::max(p0.x, p1.x) + 0.75;
      const bool touches = side == 0 ? partition->a.y == 0.0 : partition->b.y == height;
      if (touches && partition_x > lo && partition_x < hi) ok = false;
    }
    if (ok) slots.push_back(slot);
  }

  const Vec2 room_center = s.bounds.center();
  for (int side = 0; side < 4; ++side) {
    std::vector<DoorSlot> on_side;
    for (const auto& slot : slots) {
      if (slot.side == side) on_side.push_back(slot);
    }
    std::sort(on_side.begin(), on_side.end(),
              [](const DoorSlot& x, const DoorSlot& y) { return x.from < y.from; });
    const Side& sd = sides[side];
    double cursor = 0.0;
    for (const auto& slot : on_side) {
      s.walls.push_back({sd.a + sd.dir * cursor, sd.a + sd.dir * slot.from, wall_material});
      cursor = slot.to;
      DoorSpec door;
      door.id = "door_" + std::to_string(s.doors.size());
      const bool hinge_at_start = rng.bernoulli(0.5);
      door.hinge = sd.a + sd.dir * (hinge_at_start ? slot.from : slot.to);
      door.leaf_end = sd.a + sd.dir * (hinge_at_start ? slot.to : slot.from);
      const Vec2 leaf = (door.leaf_end - door.hinge) * (1.0 / door.width());
      door.handle = door.hinge + leaf * 0.85;
      const Vec2 left{-leaf.y, leaf.x};
      door.swing_side = left.dot(room_center - door.hinge) > 0 ? 1 : -1;
      door.material = "wood_door";
      door.handle_height = 1.0;
      s.doors.push_back(door);
    }
    s.walls.push_back({sd.a + sd.dir * cursor, sd.a + sd.dir * sd.length, wall_material});
  }
  if (partition) s.walls.push_back(*partition);

  // Keep-out zones: door approach regions and the partition with clearance.
  std::vector<Rect> keep_out;
  for (const auto& d : s.doors) {
    const Vec2 n = d.front_normal();
    const Vec2 far_a = d.hinge + n * 1.25;
    const Vec2 far_b = d.leaf_end + n * 1.25;
    keep_out.push_back({{std::min({d.hinge.x, d.leaf_end.x, far_a.x, far_b.x}) - 0.25,
                         std::min({d.hinge.y, d.leaf_end.y, far_a.y, far_b.y}) - 0.25},
                        {std::max({d.hinge.x, d.leaf_end.x, far_a.x, far_b.x}) + 0.25,
                         std::max({d.hinge.y, d.leaf_end.y, far_a.y, far_b.y}) + 0.25}});
  }
  if (partition) {
    keep_out.push_back(thicken_segment(partition->a, partition->b, 0.75));
    // Keep the opening passable.
    const double gy0 = partition->a.y == 0.0 ? partition->b.y : 0.0;
    const double gy1 = partition->a.y == 0.0 ? height : partition->a.y;
    keep_out.push_back({{partition_x - 1.0, gy0}, {partition_x + 1.0, gy1}});
  }

  const std::array<Vec2, 5> sizes = {Vec2{1.0, 0.5}, Vec2{0.5, 1.0}, Vec2{0.75, 0.75},
                                     Vec2{1.25, 0.5}, Vec2{0.5, 1.25}};
  const int want = 3 + static_cast<int>(rng.index(3));
  for (int attempt = 0; attempt < 400 && static_cast<int>(s.receptacles.size()) < want; ++attempt) {
    const Vec2 size = sizes[rng.index(sizes.size())];
    const Vec2 lo{snap(rng.uniform(0.25, width - size.x - 0.25)),
                  snap(rng.uniform(0.25, height - size.y - 0.25))};
    const Rect top{lo, lo + size};
    if (!s.bounds.contains(top) || top.min.x < 0.25 || top.min.y < 0.25 ||
        top.max.x > width - 0.25 || top.max.y > height - 0.25) {
      continue;
    }
    const Rect padded{top.min - Vec2{0.75, 0.75}, top.max + Vec2{0.75, 0.75}};
    bool ok = true;
    for (const auto& k : keep_out) ok = ok && !overlaps_with_area(top, k);
    for (const auto& r : s.receptacles) ok = ok && !overlaps_with_area(padded, r.top);
    if (!ok) continue;
    const double h = std::round(rng.uniform(0.45, 0.9) / 0.05) * 0.05;
    s.receptacles.push_back({"receptacle_" + std::to_string(s.receptacles.size()), top, h});
  }
  s.validate();
  return s;
}

std::vector<Scene> generate_scene_pool(std::uint64_t seed, int count) {
  std::vector<Scene> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "scene_%03d", i);
    pool.push_back(generate_scene(derive_seed(seed, "scene", i), id));
  }
  return pool;
}

}  // namespace soundtrig
