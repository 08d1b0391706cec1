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

#include "soundtrig/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soundtrig/errors.hpp"

namespace soundtrig {

Vec2 DoorSpec::front_normal() const {
  const Vec2 d = (leaf_end - hinge) * (1.0 / width());
  return Vec2{-d.y, d.x} * static_cast<double>(swing_side);
}

double SinkSpec::front_width() const {
  const Vec2 n = front_normal();
  // Front edge runs perpendicular to the normal.
  return std::abs(n.x) > std::abs(n.y) ? footprint.height() : footprint.width();
}

namespace {

bool point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const Vec2 ap = p - a;
  if (std::abs(ab.cross(ap)) > 1e-9 * std::max(1.0, ab.norm())) return false;
  const double t = ap.dot(ab) / ab.dot(ab);
  return t >= -1e-9 && t <= 1.0 + 1e-9;
}

bool axis_aligned(Vec2 a, Vec2 b) { return a.x == b.x || a.y == b.y; }

}  // namespace

void Scene::validate() const {
  if (bounds.width() <= 0.0 || bounds.height() <= 0.0 || cell_size <= 0.0) {
    throw InvalidScene("scene " + id + ": empty bounds or cell size");
  }
  std::size_t band_count = kBandCount;
  for (const auto& [name, m] : materials) {
    for (int b = 0; b < kBandCount; ++b) {
      const double a = m.absorption[b];
      const double t = m.transmission[b];
      if (a < 0 || a > 1 || t < 0 || t > 1 || a + t > 1.0 + 1e-12) {
        throw InvalidScene("material " + name + ": coefficients out of range");
      }
    }
  }
  (void)band_count;
  auto require_material = [&](const std::string& m) {
    if (!materials.contains(m)) throw InvalidScene("unknown material id: " + m);
  };
  for (const auto& w : walls) {
    require_material(w.material);
    if (!axis_aligned(w.a, w.b) || w.a == w.b) {
      throw InvalidScene("walls must be non-degenerate and axis-aligned");
    }
  }
  for (const auto& d : doors) {
    require_material(d.material);
    if (!axis_aligned(d.hinge, d.leaf_end) || d.hinge == d.leaf_end) {
      throw InvalidScene("door " + d.id + ": leaf must be axis-aligned");
    }
    if (!point_on_segment(d.handle, d.hinge, d.leaf_end)) {
      throw InvalidScene("door " + d.id + ": handle not on the door segment");
    }
    if (d.swing_side != 1 && d.swing_side != -1) {
      throw InvalidScene("door " + d.id + ": swing_side must be +1 or -1");
    }
    if (!bounds.contains(d.hinge) || !bounds.contains(d.leaf_end)) {
      throw InvalidScene("door " + d.id + ": outside bounds");
    }
  }
  for (const auto& r : receptacles) {
    if (!bounds.contains(r.top) || r.height <= 0.0) {
      throw InvalidScene("receptacle " + r.id + ": footprint outside bounds");
    }
  }
  for (const auto& s : sinks) {
    if (!bounds.contains(s.footprint)) {
      throw InvalidScene("sink " + s.id + ": footprint outside bounds");
    }
  }
}

const DoorSpec* Scene::find_door(std::string_view want) const {
  for (const auto& d : doors) {
    if (d.id == want) return &d;
  }
  return nullptr;
}

const SinkSpec* Scene::find_sink(std::string_view want) const {
  for (const auto& s : sinks) {
    if (s.id == want) return &s;
  }
  return nullptr;
}

const Receptacle* Scene::find_receptacle(std::string_view want) const {
  for (const auto& r : receptacles) {
    if (r.id == want) return &r;
  }
  return nullptr;
}

const Receptacle* Scene::receptacle_at(Vec2 p) const {
  for (const auto& r : receptacles) {
    if (r.top.contains(p)) return &r;
  }
  return nullptr;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Phone: return "Phone";
    case Category::Alarm: return "Alarm";
    case Category::Furby: return "Furby";
    case Category::Doorbell: return "Doorbell";
    case Category::Sink: return "Sink";
    case Category::Distractor: return "Distractor";
  }
  return "?";
}

Category category_from_string(std::string_view s) {
  for (Category c : {Category::Phone, Category::Alarm, Category::Furby, Category::Doorbell,
                     Category::Sink, Category::Distractor}) {
    if (to_string(c) == s) return c;
  }
  throw UnknownCategory("unknown category: " + std::string(s));
}

bool is_sound_category(Category c) { return c != Category::Distractor; }

void ObjectInstance::validate() const {
  if (kind == ObjectKind::Articulated) {
    if (!joint_angle || !joint_limits) {
      throw InvalidScene("articulated object " + id + " needs a joint angle and limits");
    }
    const auto [lo, hi] = *joint_limits;
    if (*joint_angle < lo - 1e-12 || *joint_angle > hi + 1e-12) {
      throw InvalidScene("object " + id + ": joint angle outside limits");
    }
  } else if (joint_angle) {
    throw InvalidScene("rigid object " + id + " has a joint angle");
  }
  if (emitting && !sound_clip_id) {
    throw InvalidScene("object " + id + " emits without a sound clip");
  }
}

bool RestingPose::matches(const std::array<double, kArmJointCount>& q) const {
  for (int i = 0; i < kArmJointCount; ++i) {
    if (std::abs(q[i] - joints[i]) > tolerance) return false;
  }
  return true;
}

double distance3(const EndEffector& ee, Vec2 p, double height) {
  const Vec2 d = ee.position - p;
  return std::sqrt(d.dot(d) + (ee.height - height) * (ee.height - height));
}

EndEffector forward_kinematics(const std::array<double, kArmJointCount>& q, Vec2 base,
                               double heading) {
  double angle = heading;
  Vec2 p = base;
  for (int link = 0; link < 3; ++link) {
    angle += q[link];
    p = p + heading_vector(angle) * kLinkLengths[link];
  }
  return {p, kShoulderHeight + q[kHeightJoint]};
}

double JointLimits::lo(int joint) {
  return joint == kHeightJoint ? -kPrismaticLimit : -std::numbers::pi;
}

double JointLimits::hi(int joint) {
  return joint == kHeightJoint ? kPrismaticLimit : std::numbers::pi;
}

OccupancyGrid::OccupancyGrid(Vec2 origin, double cell_size, int cols, int rows)
    : origin_(origin), cell_size_(cell_size), cols_(cols), rows_(rows),
      cells_(static_cast<std::size_t>(cols) * rows, 0) {}

std::array<int, 2> OccupancyGrid::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / cell_size_)),
          static_cast<int>(std::floor((p.y - origin_.y) / cell_size_))};
}

Vec2 OccupancyGrid::center_of(int i, int j) const {
  return {origin_.x + (i + 0.5) * cell_size_, origin_.y + (j + 0.5) * cell_size_};
}

Rect OccupancyGrid::cell_rect(int i, int j) const {
  return {{origin_.x + i * cell_size_, origin_.y + j * cell_size_},
          {origin_.x + (i + 1) * cell_size_, origin_.y + (j + 1) * cell_size_}};
}

bool OccupancyGrid::point_free(Vec2 p) const {
  const auto [i, j] = cell_of(p);
  return free(i, j);
}

std::size_t OccupancyGrid::blocked_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

std::vector<Rect> obstacle_rects(const Scene& scene, const GridOptions& options) {
  std::vector<Rect> rects;
  for (const auto& w : scene.walls) rects.push_back(thicken_segment(w.a, w.b, kWallHalfThickness));
  for (const auto& d : scene.doors) {
    if (options.open_doors.contains(d.id) || options.exclude.contains(d.id)) continue;
    rects.push_back(thicken_segment(d.hinge, d.leaf_end, kWallHalfThickness));
  }
  for (const auto& s : scene.sinks) {
    if (!options.exclude.contains(s.id)) rects.push_back(s.footprint);
  }
  for (const auto& r : scene.receptacles) {
    if (!options.exclude.contains(r.id)) rects.push_back(r.top);
  }
  return rects;
}

OccupancyGrid build_occupancy_grid(const Scene& scene, const GridOptions& options) {
  if (scene.bounds.area() <= 0.0) throw DegenerateScene("scene " + scene.id + " has zero area");
  const double cs = scene.cell_size;
  const int cols = static_cast<int>(std::ceil(scene.bounds.width() / cs - 1e-9));
  const int rows = static_cast<int>(std::ceil(scene.bounds.height() / cs - 1e-9));
  OccupancyGrid grid(scene.bounds.min, cs, cols, rows);
  const Vec2 o = scene.bounds.min;
  for (const Rect& r : obstacle_rects(scene, options)) {
    // Only cells whose index range can overlap r are visited.
    const int i0 = std::max(0, static_cast<int>(std::floor((r.min.x - o.x) / cs)) - 1);
    const int i1 = std::min(cols - 1, static_cast<int>(std::floor((r.max.x - o.x) / cs)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((r.min.y - o.y) / cs)) - 1);
    const int j1 = std::min(rows - 1, static_cast<int>(std::floor((r.max.y - o.y) / cs)) + 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        if (overlaps_with_area(grid.cell_rect(i, j), r)) grid.set_blocked(i, j, true);
      }
    }
  }
  return grid;
}

std::string_view to_string(NavAction a) {
  switch (a) {
    case NavAction::MoveForward: return "MoveForward";
    case NavAction::TurnLeft: return "TurnLeft";
    case NavAction::TurnRight: return "TurnRight";
    case NavAction::Stop: return "Stop";
  }
  return "?";
}

namespace {

// Headings on the quarter-turn lattice map to exact axis vectors so repeated
// moves stay on cell centers.
Vec2 move_direction(double heading) {
  const double quarter = std::numbers::pi / 2;
  const double k = std::round(heading / quarter);
  if (std::abs(heading - k * quarter) < 1e-9) {
    switch ((static_cast<int>(k) % 4 + 4) % 4) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }
  return heading_vector(heading);
}

}  // namespace

bool segment_free(const OccupancyGrid& grid, Vec2 from, Vec2 to) {
  const double len = distance(from, to);
  const int samples = std::max(1, static_cast<int>(std::ceil(len / (grid.cell_size() / 8))));
  for (int s = 0; s <= samples; ++s) {
    const Vec2 p = from + (to - from) * (static_cast<double>(s) / samples);
    if (!grid.point_free(p)) return false;
  }
  return true;
}

StepResult step_agent(const AgentState& state, const Action& action, const OccupancyGrid& grid) {
  StepResult out{state, false};
  if (const auto* nav = std::get_if<NavAction>(&action)) {
    switch (*nav) {
      case NavAction::MoveForward: {
        const Vec2 target = state.base + move_direction(state.heading) * kMoveStep;
        if (segment_free(grid, state.base, target)) {
          out.state.base = target;
        } else {
          out.collided = true;
        }
        break;
      }
      case NavAction::TurnLeft:
        out.state.heading = wrap_angle(state.heading + std::numbers::pi / 2);
        break;
      case NavAction::TurnRight:
        out.state.heading = wrap_angle(state.heading - std::numbers::pi / 2);
        break;
      case NavAction::Stop:
        break;
    }
    return out;
  }
  const auto& arm = std::get<ArmAction>(action);
  for (int j = 0; j < kArmJointCount; ++j) {
    const double max_delta = j == kHeightJoint ? kMaxPrismaticDelta : kMaxRevoluteDelta;
    const double d = std::clamp(arm.delta[j], -max_delta, max_delta);
    out.state.arm_joints[j] =
        std::clamp(state.arm_joints[j] + d, JointLimits::lo(j), JointLimits::hi(j));
  }
  out.state.gripper_closed = arm.gripper > 0.0;
  return out;
}

World::World(Scene scene, std::vector<ObjectInstance> objects, AgentState agent)
    : scene_(std::move(scene)), objects_(std::move(objects)), agent_(std::move(agent)) {
  scene_.validate();
  for (auto& o : objects_) {
    o.validate();
    update_articulation_state(o);
  }
  refresh_grid();
}

const ObjectInstance* World::find(std::string_view id) const {
  for (const auto& o : objects_) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

ObjectInstance* World::find_mut(std::string_view id) {
  for (auto& o : objects_) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

EndEffector World::end_effector() const {
  return forward_kinematics(agent_.arm_joints, agent_.base, agent_.heading);
}

void World::set_emitting(std::string_view id, bool emitting) {
  if (ObjectInstance* o = find_mut(id)) {
    if (emitting && !o->sound_clip_id) throw InvalidScene("object has no sound clip");
    o->emitting = emitting;
  }
}

void World::refresh_grid() {
  GridOptions opts;
  opts.open_doors = open_doors_;
  grid_ = build_occupancy_grid(scene_, opts);
}

void World::update_articulation_state(ObjectInstance& obj) {
  if (obj.kind != ObjectKind::Articulated || !obj.joint_angle) return;
  if (obj.category == Category::Sink) {
    // Water runs while the faucet handle is away from closed.
    obj.emitting = obj.sound_clip_id.has_value() && *obj.joint_angle > kSinkCloseTolerance + kThresholdEps;
  } else if (obj.category == Category::Doorbell && !obj.bound_to.empty()) {
    const bool open = *obj.joint_angle >= door_open_threshold - kThresholdEps;
    const bool was_open = open_doors_.contains(obj.bound_to);
    if (open != was_open) {
      if (open) {
        open_doors_.insert(obj.bound_to);
      } else {
        open_doors_.erase(obj.bound_to);
      }
      if (grid_.cols() > 0) refresh_grid();
    }
  }
}

WorldEvent World::step(const Action& action) {
  WorldEvent ev;
  const AgentState before = agent_;
  StepResult r = step_agent(agent_, action, grid_);
  ev.collided = r.collided;
  // Gripper transitions are resolved here; step_agent only sets the flag.
  const bool closing = !before.gripper_closed && r.state.gripper_closed;
  const bool opening = before.gripper_closed && !r.state.gripper_closed;
  r.state.held_object = before.held_object;
  r.state.attached_object = before.attached_object;
  agent_ = r.state;

  if (std::holds_alternative<ArmAction>(action) && agent_.attached_object) {
    if (ObjectInstance* art = find_mut(*agent_.attached_object)) {
      const double applied = agent_.arm_joints[kArticulationDriveJoint] -
                             before.arm_joints[kArticulationDriveJoint];
      const auto [lo, hi] = *art->joint_limits;
      art->joint_angle = std::clamp(*art->joint_angle + applied, lo, hi);
      update_articulation_state(*art);
    }
  }

  const EndEffector ee = end_effector();
  if (agent_.held_object) {
    if (ObjectInstance* held = find_mut(*agent_.held_object)) {
      held->position = ee.position;
      held->support_height = ee.height;
    }
  }

  if (closing) {
    ObjectInstance* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (auto& o : objects_) {
      const double d = distance3(ee, o.position, o.support_height);
      if (d <= kSnapThreshold + kThresholdEps && d < best_d) {
        best = &o;
        best_d = d;
      }
    }
    if (best == nullptr) {
      ev.grasp_missed = true;
    } else if (best->kind == ObjectKind::Rigid) {
      agent_.held_object = best->id;
      best->position = ee.position;
      best->support_height = ee.height;
      ev.snapped = best->id;
    } else {
      agent_.attached_object = best->id;
      ev.attached = best->id;
    }
  } else if (opening) {
    if (agent_.held_object) {
      if (ObjectInstance* held = find_mut(*agent_.held_object)) {
        const Receptacle* rec = scene_.receptacle_at(held->position);
        held->support_height = rec ? rec->height : 0.0;
      }
      ev.released = agent_.held_object;
      agent_.held_object.reset();
    }
    if (agent_.attached_object) {
      ev.detached = agent_.attached_object;
      agent_.attached_object.reset();
    }
  }
  return ev;
}

}  // namespace soundtrig
