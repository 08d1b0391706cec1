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
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "soundtrig/geometry.hpp"

namespace soundtrig {

inline constexpr int kBandCount = 4;
inline constexpr std::array<double, kBandCount> kBandCentersHz = {125.0, 500.0, 2000.0, 8000.0};

/// Half thickness used when a wall or door segment becomes an obstacle.
inline constexpr double kWallHalfThickness = 0.05;

inline constexpr double kMoveStep = 0.5;
inline constexpr std::array<double, 3> kLinkLengths = {0.3, 0.3, 0.2};
inline constexpr double kShoulderHeight = 0.6;
inline constexpr double kMaxRevoluteDelta = 0.1;
inline constexpr double kMaxPrismaticDelta = 0.05;
inline constexpr double kPrismaticLimit = 0.5;
inline constexpr int kArmJointCount = 7;
inline constexpr int kHeightJoint = 3;
/// While attached to an articulation, deltas on this joint drive the articulation.
inline constexpr int kArticulationDriveJoint = 4;

inline constexpr double kSnapThreshold = 0.15;
inline constexpr double kSinkCloseTolerance = 0.2;
inline constexpr double kDefaultDoorOpenThreshold = 1.22;
// Slack on inclusive threshold comparisons so a value constructed to sit
// exactly on a threshold is not lost to rounding.
inline constexpr double kThresholdEps = 1e-9;

struct MaterialProperties {
  std::array<double, kBandCount> absorption{};
  std::array<double, kBandCount> transmission{};
};

struct Wall {
  Vec2 a;
  Vec2 b;
  std::string material;
};

struct Receptacle {
  std::string id;
  Rect top;  // footprint and top surface
  double height = 0.0;
};

/// A hinged door sitting in a wall gap. The leaf spans hinge -> leaf_end when
/// closed; the handle lies on the leaf. `swing_side` picks the normal of the
/// leaf (+1 = left of hinge->leaf_end) on which the door opens and from which
/// it is operated.
struct DoorSpec {
  std::string id;
  Vec2 hinge;
  Vec2 leaf_end;
  Vec2 handle;
  int swing_side = 1;
  std::string material;
  double handle_height = 1.0;

  double width() const { return distance(hinge, leaf_end); }
  Vec2 front_normal() const;
};

/// A floor-standing sink. `orientation` is the heading of its front face.
struct SinkSpec {
  std::string id;
  Rect footprint;
  double orientation = 0.0;
  Vec2 handle_pivot;
  double handle_height = 0.85;

  Vec2 front_normal() const { return heading_vector(orientation); }
  /// Extent of the footprint along the front edge.
  double front_width() const;
};

struct Scene {
  std::string id;
  Rect bounds;
  double cell_size = 0.25;
  std::vector<Wall> walls;
  std::vector<Receptacle> receptacles;
  std::vector<DoorSpec> doors;
  std::vector<SinkSpec> sinks;
  std::map<std::string, MaterialProperties> materials;

  /// Throws InvalidScene when an invariant is broken.
  void validate() const;
  std::uint64_t hash() const;

  const DoorSpec* find_door(std::string_view id) const;
  const SinkSpec* find_sink(std::string_view id) const;
  const Receptacle* find_receptacle(std::string_view id) const;
  /// Receptacle whose top surface contains p, if any.
  const Receptacle* receptacle_at(Vec2 p) const;
};

enum class Category { Phone, Alarm, Furby, Doorbell, Sink, Distractor };
enum class ObjectKind { Rigid, Articulated };

std::string_view to_string(Category c);
Category category_from_string(std::string_view s);
bool is_sound_category(Category c);
inline constexpr std::array<Category, 5> kSoundCategories = {
    Category::Alarm, Category::Furby, Category::Phone, Category::Sink, Category::Doorbell};

struct ObjectInstance {
  std::string id;
  Category category = Category::Distractor;
  ObjectKind kind = ObjectKind::Rigid;
  Vec2 position;                // grasp point (handle for articulations)
  double support_height = 0.0;  // height of the grasp point
  double orientation = 0.0;
  std::optional<double> joint_angle;
  std::optional<std::array<double, 2>> joint_limits;
  std::optional<std::string> sound_clip_id;
  bool emitting = false;
  std::string bound_to;  // door or sink id for articulations

  /// Throws InvalidScene when an invariant is broken.
  void validate() const;
};

struct AgentState {
  Vec2 base;
  double heading = 0.0;
  std::array<double, kArmJointCount> arm_joints{};
  bool gripper_closed = false;
  std::optional<std::string> held_object;
  std::optional<std::string> attached_object;
};

struct RestingPose {
  std::array<double, kArmJointCount> joints{};
  double tolerance = 0.05;

  bool matches(const std::array<double, kArmJointCount>& q) const;
};

struct EndEffector {
  Vec2 position;
  double height = 0.0;
};

double distance3(const EndEffector& ee, Vec2 p, double height);

/// Planar three-link arm at the base pose plus a prismatic height joint.
/// Joints 4..6 are wrist angles that do not move the end-effector.
EndEffector forward_kinematics(const std::array<double, kArmJointCount>& q, Vec2 base,
                               double heading);

struct JointLimits {
  static double lo(int joint);
  static double hi(int joint);
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(Vec2 origin, double cell_size, int cols, int rows);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double cell_size() const { return cell_size_; }
  Vec2 origin() const { return origin_; }

  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < cols_ && j < rows_; }
  bool blocked(int i, int j) const { return !in_range(i, j) || cells_[index(i, j)] != 0; }
  bool free(int i, int j) const { return !blocked(i, j); }
  void set_blocked(int i, int j, bool b) { cells_[index(i, j)] = b ? 1 : 0; }

  /// Cell (column, row) containing p; may be out of range.
  std::array<int, 2> cell_of(Vec2 p) const;
  Vec2 center_of(int i, int j) const;
  Rect cell_rect(int i, int j) const;
  bool point_free(Vec2 p) const;
  std::size_t blocked_count() const;

  bool operator==(const OccupancyGrid&) const = default;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * cols_ + i; }

  Vec2 origin_;
  double cell_size_ = 0.25;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct GridOptions {
  std::set<std::string> open_doors;
  std::set<std::string> exclude;  // door/sink/receptacle ids left out
};

/// Obstacle rectangles: thickened walls, closed doors, sink footprints and
/// receptacle footprints.
std::vector<Rect> obstacle_rects(const Scene& scene, const GridOptions& options = {});

/// A cell is blocked iff it shares positive area with an obstacle rectangle.
OccupancyGrid build_occupancy_grid(const Scene& scene, const GridOptions& options = {});

enum class NavAction { MoveForward, TurnLeft, TurnRight, Stop };
std::string_view to_string(NavAction a);

struct ArmAction {
  std::array<double, kArmJointCount> delta{};
  double gripper = 0.0;  // > 0 closes, <= 0 opens
  bool stop = false;
};

using Action = std::variant<NavAction, ArmAction>;

struct StepResult {
  AgentState state;
  bool collided = false;
};

/// Pure agent kinematics. Gripper semantics (snap, attach, release) live in World.
StepResult step_agent(const AgentState& state, const Action& action, const OccupancyGrid& grid);

/// True when the straight move from `from` to `to` stays in free cells.
bool segment_free(const OccupancyGrid& grid, Vec2 from, Vec2 to);

struct WorldEvent {
  bool collided = false;
  std::optional<std::string> snapped;
  std::optional<std::string> attached;
  std::optional<std::string> released;
  std::optional<std::string> detached;
  bool grasp_missed = false;
};

/// Mutable simulation state for one episode. Not shared across threads.
class World {
 public:
  World(Scene scene, std::vector<ObjectInstance> objects, AgentState agent);

  const Scene& scene() const { return scene_; }
  const OccupancyGrid& grid() const { return grid_; }
  const AgentState& agent() const { return agent_; }
  const std::vector<ObjectInstance>& objects() const { return objects_; }
  const ObjectInstance* find(std::string_view id) const;
  EndEffector end_effector() const;

  WorldEvent step(const Action& action);

  void set_emitting(std::string_view id, bool emitting);
  void set_agent(const AgentState& s) { agent_ = s; }
  const std::set<std::string>& open_doors() const { return open_doors_; }

  double door_open_threshold = kDefaultDoorOpenThreshold;

 private:
  ObjectInstance* find_mut(std::string_view id);
  void refresh_grid();
  void update_articulation_state(ObjectInstance& obj);

  Scene scene_;
  std::vector<ObjectInstance> objects_;
  AgentState agent_;
  std::set<std::string> open_doors_;
  OccupancyGrid grid_;
};

}  // namespace soundtrig
