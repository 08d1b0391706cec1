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


#include "soundtrig/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "soundtrig/pathfinding.hpp"

namespace soundtrig {

std::optional<std::array<double, kArmJointCount>> solve_arm_ik(Vec2 base, double heading, Vec2 target,
                                                               double height) {
  const Vec2 w = target - base;
  // Target in the agent frame.
  const double c = std::cos(-heading), s = std::sin(-heading);
  const Vec2 p{c * w.x - s * w.y, s * w.x + c * w.y};
  const double d = p.norm();
  const double l1 = kLinkLengths[0];
  const double reach = kLinkLengths[0] + kLinkLengths[1] + kLinkLengths[2];
  const double dz = height - kShoulderHeight;
  if (d > reach + 1e-9 || std::abs(dz) > kPrismaticLimit + 1e-9) return std::nullopt;
  std::array<double, kArmJointCount> q{};
  const double phi = std::atan2(p.y, p.x);
  if (d >= 0.4) {
    // Links two and three held straight.
    const double l2 = kLinkLengths[1] + kLinkLengths[2];
    const double ce = std::clamp((d * d - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0);
    const double e = std::acos(ce);
    q[0] = phi - std::atan2(l2 * std::sin(e), l1 + l2 * ce);
    q[1] = e;
    q[2] = 0.0;
  } else {
    // Fold link three so links two and three act as one 0.3 m link.
    const double l2 = kLinkLengths[1], l3 = kLinkLengths[2];
    const double q2 = std::acos(-1.0 / 3.0);
    const Vec2 eff{l2 + l3 * std::cos(q2), l3 * std::sin(q2)};
    const double le = eff.norm();
    const double beta = std::atan2(eff.y, eff.x);
    const double ce = std::clamp((d * d - l1 * l1 - le * le) / (2 * l1 * le), -1.0, 1.0);
    const double e = std::acos(ce);
    q[0] = phi - std::atan2(le * std::sin(e), l1 + le * ce);
    q[1] = e - beta;
    q[2] = q2;
  }
  q[0] = wrap_angle(q[0]);
  q[kHeightJoint] = std::clamp(dz, -kPrismaticLimit, kPrismaticLimit);
  return q;
}

ArmAction step_toward(const std::array<double, kArmJointCount>& q,
                      const std::array<double, kArmJointCount>& q_target, double gripper) {
  ArmAction a;
  a.gripper = gripper;
  for (int j = 0; j < kArmJointCount; ++j) {
    const double lim = j == kHeightJoint ? kMaxPrismaticDelta : kMaxRevoluteDelta;
    a.delta[j] = std::clamp(q_target[j] - q[j], -lim, lim);
  }
  return a;
}

namespace {

bool at(const std::array<double, kArmJointCount>& q, const std::array<double, kArmJointCount>& t) {
  for (int j = 0; j < kArmJointCount; ++j) {
    if (std::abs(q[j] - t[j]) > 1e-9) return false;
  }
  return true;
}

}  // namespace

void ScriptedNavController::reset(const SkillContext& ctx) {
  plan_.clear();
  const World& w = *ctx.world;
  const auto path = plan_lattice_path(w.grid(), w.agent().base, target_position(w, ctx.target_id), kReachRadius);
  if (!path) {
    plan_.push_back(NavAction::Stop);
    return;
  }
  for (NavAction a : path_to_actions(*path, w.agent().heading)) plan_.push_back(a);
}

NavAction ScriptedNavController::act(const SkillContext&) {
  if (plan_.empty()) return NavAction::Stop;
  const NavAction a = plan_.front();
  plan_.pop_front();
  return a;
}

void ScriptedManipController::reset(const SkillContext& ctx, Skill skill) {
  skill_ = skill;
  phase_ = Phase::Reach;
  sweep_steps_ = 0;
  const World& w = *ctx.world;
  Vec2 goal;
  double height;
  if (skill == Skill::Place && ctx.place_target) {
    goal = *ctx.place_target;
    const Receptacle* r = w.scene().receptacle_at(goal);
    height = r ? r->height : 0.0;
  } else {
    const ObjectInstance* o = w.find(ctx.target_id);
    goal = o->position;
    height = o->support_height;
  }
  const auto q = solve_arm_ik(w.agent().base, w.agent().heading, goal, height);
  if (q) {
    reach_ = *q;
  } else {
    // Out of reach: stretch toward the goal anyway; the grasp will miss.
    const Vec2 d = goal - w.agent().base;
    reach_ = {};
    reach_[0] = wrap_angle(std::atan2(d.y, d.x) - w.agent().heading);
    reach_[kHeightJoint] = std::clamp(height - kShoulderHeight, -kPrismaticLimit, kPrismaticLimit);
  }
}

ArmAction ScriptedManipController::toward(const std::array<double, kArmJointCount>& q_target,
                                          const AgentState& a, double gripper) const {
  return step_toward(a.arm_joints, q_target, gripper);
}

ArmAction ScriptedManipController::act(const SkillContext& ctx) {
  const World& w = *ctx.world;
  const AgentState& a = w.agent();
  const double hold = 1.0, open = -1.0;
  for (;;) {
    switch (phase_) {
      case Phase::Reach: {
        const double g = skill_ == Skill::Place ? hold : open;
        if (!at(a.arm_joints, reach_)) return toward(reach_, a, g);
        phase_ = skill_ == Skill::Place ? Phase::Release : Phase::Grip;
        continue;
      }
      case Phase::Grip:
        if (!a.gripper_closed) return toward(a.arm_joints, a, hold);
        phase_ = skill_ == Skill::Pick ? Phase::Retract : Phase::Sweep;
        continue;
      case Phase::Sweep: {
        const ObjectInstance* o = w.find(ctx.target_id);
        const double angle = o->joint_angle.value_or(0.0);
        const double goal = skill_ == Skill::OpenDoor ? door_target : sink_target;
        if (a.attached_object == ctx.target_id && std::abs(angle - goal) > 1e-9 && sweep_steps_++ < kMaxSweepSteps) {
          auto q = a.arm_joints;
          q[kArticulationDriveJoint] += goal - angle;
          ArmAction act = toward(q, a, hold);
          // Stop sweeping once the joint no longer moves (limit reached).
          if (std::abs(act.delta[kArticulationDriveJoint]) > 1e-12) return act;
        }
        phase_ = Phase::Release;
        continue;
      }
      case Phase::Release:
        if (a.gripper_closed) return toward(a.arm_joints, a, open);
        phase_ = Phase::Retract;
        continue;
      case Phase::Retract: {
        const std::array<double, kArmJointCount> rest = ctx.rest.joints;
        const double g = (skill_ == Skill::Pick) ? hold : open;
        if (!at(a.arm_joints, rest)) return toward(rest, a, g);
        phase_ = Phase::Done;
        continue;
      }
      case Phase::Done: {
        ArmAction stop;
        stop.gripper = (skill_ == Skill::Pick) ? hold : open;
        stop.stop = true;
        return stop;
      }
    }
  }
}

ArmAction ScriptedArmSequence::act(const SkillContext&) {
  if (next_ >= actions_.size()) {
    ArmAction stop;
    stop.stop = true;
    return stop;
  }
  return actions_[next_++];
}

NavAction ScriptedNavSequence::act(const SkillContext&) {
  if (next_ >= actions_.size()) return NavAction::Stop;
  return actions_[next_++];
}

}  // namespace soundtrig
