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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "soundtrig/controllers.hpp"
#include "soundtrig/errors.hpp"
#include "soundtrig/scene_gen.hpp"
#include "soundtrig/skills.hpp"

using namespace soundtrig;

namespace {

using Q = std::array<double, kArmJointCount>;

Scene room() {
  Scene s = make_empty_room("room", 6, 6);
  s.receptacles.push_back({"table", {{4.0, 2.0}, {5.0, 4.0}}, 0.5});
  return s;
}

AgentState agent_at(Vec2 base, double heading = 0.0, Q q = {}) {
  AgentState a;
  a.base = base;
  a.heading = heading;
  a.arm_joints = q;
  return a;
}

ObjectInstance rigid(const std::string& id, Vec2 p, double h) {
  ObjectInstance o;
  o.id = id;
  o.category = Category::Phone;
  o.position = p;
  o.support_height = h;
  o.sound_clip_id = "phone_0";
  return o;
}

ObjectInstance articulated(const std::string& id, Category c, Vec2 p, double h, double angle,
                           std::array<double, 2> limits) {
  ObjectInstance o;
  o.id = id;
  o.category = c;
  o.kind = ObjectKind::Articulated;
  o.position = p;
  o.support_height = h;
  o.joint_angle = angle;
  o.joint_limits = limits;
  o.sound_clip_id = "clip_0";
  return o;
}

// Arm actions that bring q to rest, simulating the joint clamps.
std::vector<ArmAction> to_rest(Q q, double gripper, const Q& rest = {}) {
  std::vector<ArmAction> out;
  for (int k = 0; k < 100; ++k) {
    bool done = true;
    for (int j = 0; j < kArmJointCount; ++j) done = done && std::abs(q[j] - rest[j]) < 1e-12;
    if (done) break;
    const ArmAction a = step_toward(q, rest, gripper);
    for (int j = 0; j < kArmJointCount; ++j) q[j] += a.delta[j];
    out.push_back(a);
  }
  return out;
}

ArmAction grip(double g) {
  ArmAction a;
  a.gripper = g;
  return a;
}

ArmAction drive(double d, double g = 1.0) {
  ArmAction a;
  a.delta[kArticulationDriveJoint] = d;
  a.gripper = g;
  return a;
}

template <class... V>
std::vector<ArmAction> concat(V... parts) {
  std::vector<ArmAction> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

SkillContext ctx_for(World& w, const std::string& target) {
  SkillContext c;
  c.world = &w;
  c.target_id = target;
  return c;
}

struct NeverStopArm : ManipController {
  ArmAction act(const SkillContext&) override { return {}; }
};

struct SpinNav : NavController {
  NavAction act(const SkillContext&) override { return NavAction::TurnLeft; }
};

const Q kReachPose = {0.3, -0.2, 0.1, 0.0, 0.0, 0.0, 0.0};

}  // namespace

TEST(Navigate, StopInsideRadiusSucceeds) {
  for (const auto& [offset, ok] : std::vector<std::pair<double, bool>>{{0.45, true}, {0.5, true}, {0.55, false}}) {
    World w(room(), {rigid("t", {3, 3}, 0.0)}, agent_at({3 + offset, 3}));
    ScriptedNavSequence stop({NavAction::Stop});
    const SkillOutcome o = run_navigate(ctx_for(w, "t"), stop);
    EXPECT_EQ(o.success, ok) << offset;
    if (!ok) EXPECT_EQ(o.failure, FailureReason::StoppedOutOfRange);
    EXPECT_EQ(w.agent().base, (Vec2{3 + offset, 3}));
  }
}

TEST(Navigate, BudgetExhaustionTimesOut) {
  World w(room(), {rigid("t", {3, 3}, 0.0)}, agent_at({1, 1}));
  SpinNav spin;
  SkillContext c = ctx_for(w, "t");
  c.nav_budget = 25;
  const SkillOutcome o = run_navigate(c, spin);
  EXPECT_EQ(o.failure, FailureReason::Timeout);
  EXPECT_EQ(o.steps, 25);
}

TEST(Pick, CloseNearThenRestSucceeds) {
  const Vec2 base{2, 3};
  const EndEffector ee = forward_kinematics(kReachPose, base, 0.0);
  World w(room(), {rigid("t", ee.position + Vec2{0.0, 0.10}, ee.height)}, agent_at(base, 0.0, kReachPose));
  ScriptedArmSequence seq(concat(std::vector{grip(1)}, to_rest(kReachPose, 1)));
  const SkillOutcome o = run_pick(ctx_for(w, "t"), seq);
  EXPECT_TRUE(o.success);
  EXPECT_EQ(w.agent().held_object, "t");
  // The held object follows the end-effector back to rest.
  EXPECT_NEAR(distance(w.find("t")->position, w.end_effector().position), 0.0, 1e-12);
}

TEST(Pick, CloseTooFarIsNoGrasp) {
  const Vec2 base{2, 3};
  const EndEffector ee = forward_kinematics(kReachPose, base, 0.0);
  World w(room(), {rigid("t", ee.position + Vec2{0.0, 0.20}, ee.height)}, agent_at(base, 0.0, kReachPose));
  // Moving onto the object afterwards does not rescue the attempt.
  ScriptedArmSequence seq(concat(std::vector{grip(1), grip(0), grip(1)}, to_rest(kReachPose, 1)));
  const SkillOutcome o = run_pick(ctx_for(w, "t"), seq);
  EXPECT_FALSE(o.success);
  EXPECT_EQ(o.failure, FailureReason::NoGrasp);
}

TEST(Pick, JointOffRestIsNoRetract) {
  const Vec2 base{2, 3};
  const EndEffector ee = forward_kinematics(kReachPose, base, 0.0);
  World w(room(), {rigid("t", ee.position, ee.height)}, agent_at(base, 0.0, kReachPose));
  Q almost{};
  almost[1] = 0.2;
  ScriptedArmSequence seq(concat(std::vector{grip(1)}, to_rest(kReachPose, 1, almost)));
  const SkillOutcome o = run_pick(ctx_for(w, "t"), seq);
  EXPECT_EQ(o.failure, FailureReason::NoRetract);
}

namespace {

// Agent facing the table with the held object at the end-effector, lowered to
// the table surface height.
World holding_world(Vec2 base, Vec2 extra_offset = {}) {
  Q q{};
  q[kHeightJoint] = -0.1;
  AgentState a = agent_at(base, 0.0, q);
  const EndEffector ee = forward_kinematics(q, base + extra_offset, 0.0);
  a.base = base + extra_offset;
  a.gripper_closed = true;
  a.held_object = "t";
  return World(room(), {rigid("t", ee.position, ee.height)}, a);
}

}  // namespace

TEST(Place, ReleaseNearTargetOnReceptacleSucceeds) {
  World w = holding_world({3.6, 3.0});
  const Vec2 release = w.end_effector().position;
  ASSERT_NE(w.scene().receptacle_at(release), nullptr);
  SkillContext c = ctx_for(w, "t");
  c.place_target = release + Vec2{0.0, 0.10};
  Q q{};
  q[kHeightJoint] = -0.1;
  ScriptedArmSequence seq(concat(std::vector{grip(0)}, to_rest(q, 0)));
  const SkillOutcome o = run_place(c, seq);
  EXPECT_TRUE(o.success);
  EXPECT_DOUBLE_EQ(w.find("t")->support_height, 0.5);
  EXPECT_FALSE(w.agent().held_object.has_value());
}

TEST(Place, ReleaseOverFloorIsDropped) {
  World w = holding_world({1.0, 3.0});
  ASSERT_EQ(w.scene().receptacle_at(w.end_effector().position), nullptr);
  SkillContext c = ctx_for(w, "t");
  c.place_target = Vec2{4.5, 3.0};
  ScriptedArmSequence seq({grip(0)});
  EXPECT_EQ(run_place(c, seq).failure, FailureReason::DroppedObject);
}

TEST(Place, ReleaseBeyondThresholdIsDropped) {
  World w = holding_world({3.6, 3.0});
  SkillContext c = ctx_for(w, "t");
  c.place_target = w.end_effector().position + Vec2{0.0, 0.20};
  ScriptedArmSequence seq({grip(0)});
  EXPECT_EQ(run_place(c, seq).failure, FailureReason::DroppedObject);
}

TEST(Place, NeverReleasingTimesOut) {
  World w = holding_world({3.6, 3.0});
  SkillContext c = ctx_for(w, "t");
  c.place_target = w.end_effector().position;
  NeverStopArm idle;
  const SkillOutcome o = run_place(c, idle);
  EXPECT_EQ(o.failure, FailureReason::Timeout);
  EXPECT_EQ(o.steps, kManipBudget);
}

namespace {

World door_world() {
  const Vec2 base{2, 3};
  const EndEffector ee = forward_kinematics(Q{}, base, 0.0);
  return World(room(), {articulated("door", Category::Doorbell, ee.position, ee.height, 0.0, {0.0, std::numbers::pi / 2})},
               agent_at(base));
}

std::vector<ArmAction> sweep(int steps, double d) {
  std::vector<ArmAction> out{grip(1)};
  for (int k = 0; k < steps; ++k) out.push_back(drive(d));
  out.push_back(grip(0));
  Q q{};
  q[kArticulationDriveJoint] = steps * d;
  const auto back = to_rest(q, 0);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

}  // namespace

TEST(OpenDoor, SweepPastThresholdSucceeds) {
  World w = door_world();
  ScriptedArmSequence seq(sweep(13, 0.1));
  const SkillOutcome o = run_open_door(ctx_for(w, "door"), seq);
  EXPECT_TRUE(o.success);
  EXPECT_NEAR(*w.find("door")->joint_angle, 1.3, 1e-9);
  EXPECT_FALSE(w.agent().attached_object.has_value());
}

TEST(OpenDoor, ShortSweepIsJointShort) {
  World w = door_world();
  ScriptedArmSequence seq(sweep(9, 0.1));
  EXPECT_EQ(run_open_door(ctx_for(w, "door"), seq).failure, FailureReason::JointShort);
}

TEST(OpenDoor, ThresholdIsConfigurable) {
  World w = door_world();
  w.door_open_threshold = 0.8;
  ScriptedArmSequence seq(sweep(9, 0.1));
  EXPECT_TRUE(run_open_door(ctx_for(w, "door"), seq).success);
}

TEST(OpenDoor, StillAttachedIsNoRetract) {
  World w = door_world();
  std::vector<ArmAction> acts{grip(1)};
  for (int k = 0; k < 13; ++k) acts.push_back(drive(0.1));
  ScriptedArmSequence seq(acts);
  EXPECT_EQ(run_open_door(ctx_for(w, "door"), seq).failure, FailureReason::NoRetract);
}

namespace {

World sink_world() {
  const Vec2 base{2, 3};
  const EndEffector ee = forward_kinematics(Q{}, base, 0.0);
  return World(room(), {articulated("sink", Category::Sink, ee.position, ee.height, 0.6, {0.0, 1.6})},
               agent_at(base));
}

std::vector<ArmAction> turn_handle(std::vector<double> deltas) {
  std::vector<ArmAction> out{grip(1)};
  double total = 0.0;
  for (double d : deltas) {
    out.push_back(drive(d));
    total += d;
  }
  out.push_back(grip(0));
  Q q{};
  q[kArticulationDriveJoint] = total;
  const auto back = to_rest(q, 0);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

}  // namespace

TEST(CloseSink, WithinToleranceSucceedsAndSilences) {
  World w = sink_world();
  ASSERT_TRUE(w.find("sink")->emitting);
  ScriptedArmSequence seq(turn_handle({-0.1, -0.1, -0.1, -0.1, -0.05}));
  const SkillOutcome o = run_close_sink(ctx_for(w, "sink"), seq);
  EXPECT_TRUE(o.success);
  EXPECT_NEAR(*w.find("sink")->joint_angle, 0.15, 1e-9);
  EXPECT_FALSE(w.find("sink")->emitting);
}

TEST(CloseSink, OutsideToleranceFails) {
  World w = sink_world();
  ScriptedArmSequence seq(turn_handle({-0.1, -0.1, -0.1, -0.05}));
  const SkillOutcome o = run_close_sink(ctx_for(w, "sink"), seq);
  EXPECT_EQ(o.failure, FailureReason::AngleOutOfTolerance);
  EXPECT_NEAR(*w.find("sink")->joint_angle, 0.25, 1e-9);
  EXPECT_TRUE(w.find("sink")->emitting);
}

TEST(CloseSink, BumpingUpwardFails) {
  World w = sink_world();
  ScriptedArmSequence seq(turn_handle({0.1, 0.1, 0.1}));
  const SkillOutcome o = run_close_sink(ctx_for(w, "sink"), seq);
  EXPECT_FALSE(o.success);
  EXPECT_GT(*w.find("sink")->joint_angle, 0.6);
}

TEST(Chain, AllSuccessIsOverallTrue) {
  // Folded arm so the handle is inside the nav radius.
  const Q folded = {0.0, 1.8, 1.2, 0.0, 0.0, 0.0, 0.0};
  const Vec2 base{2, 3};
  const EndEffector ee = forward_kinematics(folded, base, 0.0);
  ASSERT_LT(distance(ee.position, base), kReachRadius);
  World w(room(), {articulated("sink", Category::Sink, ee.position, ee.height, 0.6, {0.0, 1.6})},
          agent_at(base, 0.0, folded));
  ScriptedNavSequence nav({NavAction::Stop});
  std::vector<ArmAction> acts{grip(1)};
  for (int k = 0; k < 6; ++k) acts.push_back(drive(-0.1));
  acts.push_back(grip(0));
  Q q = folded;
  q[kArticulationDriveJoint] = -0.6;
  const auto back = to_rest(q, 0);
  acts.insert(acts.end(), back.begin(), back.end());
  ScriptedArmSequence arm(acts);
  const ChainResult r = run_chain(ctx_for(w, "sink"), {Skill::Nav, Skill::CloseSink}, {&nav, &arm});
  EXPECT_TRUE(r.overall);
  ASSERT_EQ(r.outcomes.size(), 2u);
}

TEST(Chain, NavFailureSkipsTheRest) {
  World w(room(), {rigid("t", {5, 5}, 0.5)}, agent_at({1, 1}));
  ScriptedNavSequence nav({NavAction::Stop});
  ScriptedArmSequence arm({grip(1)});
  SkillContext c = ctx_for(w, "t");
  c.place_target = Vec2{4.5, 3};
  const ChainResult r = run_chain(c, {Skill::Nav, Skill::Pick, Skill::Place}, {&nav, &arm});
  EXPECT_FALSE(r.overall);
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_EQ(r.outcomes[0].failure, FailureReason::StoppedOutOfRange);
}

TEST(Chain, EmptyChainRejected) {
  World w(room(), {rigid("t", {5, 5}, 0.5)}, agent_at({1, 1}));
  ScriptedNavSequence nav({});
  EXPECT_THROW(run_chain(ctx_for(w, "t"), {}, {&nav, nullptr}), InvalidChain);
}

namespace {

const SoundBank& bank() {
  static const SoundBank b = synthesize_bank(7);
  return b;
}

const std::vector<Scene>& pool() {
  static const std::vector<Scene> p = generate_scene_pool(11, 4);
  return p;
}

World world_for(const Episode& ep) {
  for (const auto& s : pool()) {
    if (s.id == ep.scene_id) {
      const Scene scene = episode_scene(s, ep);
      return World(scene, episode_objects(ep, scene), episode_agent(ep));
    }
  }
  throw std::runtime_error("scene not in pool");
}

// Records whether the main source was still emitting when each stage began.
struct WatchingNav : ScriptedNavController {
  std::string watch;
  std::vector<bool> emitting_at_reset;
  void reset(const SkillContext& ctx) override {
    emitting_at_reset.push_back(ctx.world->find(watch)->emitting);
    ScriptedNavController::reset(ctx);
  }
};

}  // namespace

TEST(Oracle, ScriptedControllersSolveValidatedEpisodes) {
  for (Task t : {Task::SonicStow, Task::SonicInteract, Task::BiSonic}) {
    for (std::uint64_t s = 0; s < 12; ++s) {
      Rng rng(derive_seed(3, "oracle", s));
      const Episode ep = generate_episode(t, pool(), bank(), Split::Test, rng, "o" + std::to_string(s));
      World w = world_for(ep);
      ScriptedNavController nav;
      ScriptedManipController manip;
      const PlanResult r = run_plan(w, ep, ep.ground_truth_plan(), {&nav, &manip});
      EXPECT_TRUE(r.overall) << to_string(t) << " " << s;
    }
  }
}

TEST(Oracle, BiSonicSilencesMainSourceBeforeSecondStage) {
  Rng rng(8);
  const Episode ep = generate_episode(Task::BiSonic, pool(), bank(), Split::Test, rng, "bi");
  World w = world_for(ep);
  WatchingNav nav;
  nav.watch = ep.source_in_order(0).object_id;
  ScriptedManipController manip;
  const PlanResult r = run_plan(w, ep, ep.ground_truth_plan(), {&nav, &manip});
  ASSERT_TRUE(r.overall);
  ASSERT_EQ(nav.emitting_at_reset.size(), 2u);
  EXPECT_TRUE(nav.emitting_at_reset[0]);
  EXPECT_FALSE(nav.emitting_at_reset[1]);
  EXPECT_EQ(r.stages.size(), 2u);
}

TEST(Oracle, WrongPlanFailsPick) {
  Rng rng(4);
  Episode ep;
  do {
    ep = generate_episode(Task::SonicInteract, pool(), bank(), Split::Test, rng, "w");
  } while (ep.sources[0].category != Category::Sink);
  World w = world_for(ep);
  ScriptedNavController nav;
  ScriptedManipController manip;
  const PlanResult r = run_plan(w, ep, SkillChain{Skill::Nav, Skill::Pick, Skill::Place}, {&nav, &manip});
  EXPECT_FALSE(r.overall);
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_TRUE(r.stages[0].outcomes[0].success);
  EXPECT_FALSE(r.stages[0].outcomes[1].success);
}
