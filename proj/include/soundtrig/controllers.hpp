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

#include <deque>
#include <optional>

#include "soundtrig/skills.hpp"

namespace soundtrig {

// Joint targets putting the end-effector at (target, height) for an agent at
// (base, heading). Nullopt when the point is beyond reach.
std::optional<std::array<double, kArmJointCount>> solve_arm_ik(Vec2 base, double heading, Vec2 target,
                                                               double height);

// Follows an A* lattice path to within the reach radius, then stops.
class ScriptedNavController : public NavController {
 public:
  void reset(const SkillContext& ctx) override;
  NavAction act(const SkillContext& ctx) override;

 private:
  std::deque<NavAction> plan_;
};

// Scripted oracle for all four manipulation skills: reach via IK, grasp,
// drive the articulation through joint 4, release and return to rest.
class ScriptedManipController : public ManipController {
 public:
  // Door sweep target; past the default open threshold.
  double door_target = 1.35;
  // Sink sweep target.
  double sink_target = 0.0;

  void reset(const SkillContext& ctx, Skill skill) override;
  ArmAction act(const SkillContext& ctx) override;

 private:
  enum class Phase { Reach, Grip, Sweep, Release, Retract, Done };

  ArmAction toward(const std::array<double, kArmJointCount>& q_target, const AgentState& a, double gripper) const;

  static constexpr int kMaxSweepSteps = 60;

  Skill skill_ = Skill::Pick;
  int sweep_steps_ = 0;
  Phase phase_ = Phase::Reach;
  std::array<double, kArmJointCount> reach_{};
};

// Applies a fixed action script, then stops. Used by tests and adversarial cases.
class ScriptedArmSequence : public ManipController {
 public:
  explicit ScriptedArmSequence(std::vector<ArmAction> actions) : actions_(std::move(actions)) {}
  void reset(const SkillContext&, Skill) override { next_ = 0; }
  ArmAction act(const SkillContext&) override;

 private:
  std::vector<ArmAction> actions_;
  std::size_t next_ = 0;
};

class ScriptedNavSequence : public NavController {
 public:
  explicit ScriptedNavSequence(std::vector<NavAction> actions) : actions_(std::move(actions)) {}
  void reset(const SkillContext&) override { next_ = 0; }
  NavAction act(const SkillContext&) override;

 private:
  std::vector<NavAction> actions_;
  std::size_t next_ = 0;
};

// Arm action moving from q toward q_target with per-joint clamped deltas.
ArmAction step_toward(const std::array<double, kArmJointCount>& q,
                      const std::array<double, kArmJointCount>& q_target, double gripper);

}  // namespace soundtrig
