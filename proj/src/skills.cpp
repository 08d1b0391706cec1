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


#include "soundtrig/skills.hpp"

#include <cmath>
#include <fstream>

#include "soundtrig/errors.hpp"
#include "soundtrig/scene_io.hpp"

namespace soundtrig {

using nlohmann::json;

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::Timeout: return "Timeout";
    case FailureReason::StoppedOutOfRange: return "StoppedOutOfRange";
    case FailureReason::NoGrasp: return "NoGrasp";
    case FailureReason::DroppedObject: return "DroppedObject";
    case FailureReason::NoRetract: return "NoRetract";
    case FailureReason::JointShort: return "JointShort";
    case FailureReason::AngleOutOfTolerance: return "AngleOutOfTolerance";
  }
  return "?";
}

FailureReason failure_from_string(std::string_view s) {
  for (auto r : {FailureReason::Timeout, FailureReason::StoppedOutOfRange, FailureReason::NoGrasp,
                 FailureReason::DroppedObject, FailureReason::NoRetract, FailureReason::JointShort,
                 FailureReason::AngleOutOfTolerance}) {
    if (to_string(r) == s) return r;
  }
  throw FormatError("unknown failure reason: " + std::string(s));
}

void TraceLog::record(const std::string& skill, int step, const json& action, const World& world,
                      const json& predicate) {
  const AgentState& a = world.agent();
  lines_.push_back({{"episode", episode_id},
                    {"skill", skill},
                    {"step", step},
                    {"action", action},
                    {"base", vec_to_json(a.base)},
                    {"heading", a.heading},
                    {"joints", a.arm_joints},
                    {"gripper_closed", a.gripper_closed},
                    {"predicate", predicate}});
}

void TraceLog::mark(const std::string& event, const json& detail) {
  lines_.push_back({{"episode", episode_id}, {"event", event}, {"detail", detail}});
}

void TraceLog::write(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot write " + path.string());
  for (const auto& l : lines_) f << l.dump() << '\n';
}

Vec2 target_position(const World& world, const std::string& target_id) {
  const ObjectInstance* o = world.find(target_id);
  if (!o) throw InvalidScene("unknown target object " + target_id);
  return o->position;
}

namespace {

json arm_json(const ArmAction& a) {
  return {{"delta", a.delta}, {"gripper", a.gripper}, {"stop", a.stop}};
}

SkillOutcome finish(Skill s, int steps, std::optional<FailureReason> why) {
  return {s, !why.has_value(), steps, why};
}

void trace(const SkillContext& ctx, Skill s, int step, const json& action, const json& pred) {
  if (ctx.trace) ctx.trace->record(std::string(to_string(s)), step, action, *ctx.world, pred);
}

}  // namespace

SkillOutcome run_navigate(const SkillContext& ctx, NavController& controller) {
  World& w = *ctx.world;
  controller.reset(ctx);
  for (int step = 1; step <= ctx.nav_budget; ++step) {
    const NavAction a = controller.act(ctx);
    const double d = distance(w.agent().base, target_position(w, ctx.target_id));
    if (a == NavAction::Stop) {
      trace(ctx, Skill::Nav, step, std::string(to_string(a)), {{"distance", d}});
      if (d <= kReachRadius + kThresholdEps) return finish(Skill::Nav, step, std::nullopt);
      return finish(Skill::Nav, step, FailureReason::StoppedOutOfRange);
    }
    const WorldEvent ev = w.step(a);
    trace(ctx, Skill::Nav, step, std::string(to_string(a)),
          {{"distance", distance(w.agent().base, target_position(w, ctx.target_id))},
           {"collided", ev.collided}});
  }
  return finish(Skill::Nav, ctx.nav_budget, FailureReason::Timeout);
}

SkillOutcome run_pick(const SkillContext& ctx, ManipController& controller) {
  World& w = *ctx.world;
  controller.reset(ctx, Skill::Pick);
  bool holding = w.agent().held_object == ctx.target_id;
  for (int step = 1; step <= ctx.manip_budget; ++step) {
    const ArmAction a = controller.act(ctx);
    if (a.stop) {
      trace(ctx, Skill::Pick, step, arm_json(a), {{"holding", holding}});
      if (!holding) return finish(Skill::Pick, step, FailureReason::NoGrasp);
      if (!ctx.rest.matches(w.agent().arm_joints)) return finish(Skill::Pick, step, FailureReason::NoRetract);
      return finish(Skill::Pick, step, std::nullopt);
    }
    const WorldEvent ev = w.step(a);
    const ObjectInstance* o = w.find(ctx.target_id);
    trace(ctx, Skill::Pick, step, arm_json(a),
          {{"ee_distance", distance3(w.end_effector(), o->position, o->support_height)},
           {"holding", w.agent().held_object == ctx.target_id}});
    if (ev.grasp_missed || ev.attached || (ev.snapped && *ev.snapped != ctx.target_id)) {
      return finish(Skill::Pick, step, FailureReason::NoGrasp);
    }
    if (ev.snapped) holding = true;
    if (ev.released && holding) return finish(Skill::Pick, step, FailureReason::DroppedObject);
  }
  return finish(Skill::Pick, ctx.manip_budget, FailureReason::Timeout);
}

SkillOutcome run_place(const SkillContext& ctx, ManipController& controller) {
  World& w = *ctx.world;
  controller.reset(ctx, Skill::Place);
  if (!ctx.place_target) throw InvalidScene("place skill needs a place target");
  const Vec2 goal = *ctx.place_target;
  const Receptacle* goal_rec = w.scene().receptacle_at(goal);
  bool placed = false;
  for (int step = 1; step <= ctx.manip_budget; ++step) {
    const ArmAction a = controller.act(ctx);
    if (a.stop) {
      trace(ctx, Skill::Place, step, arm_json(a), {{"placed", placed}});
      if (!placed) {
        if (w.agent().held_object == ctx.target_id) {
          return finish(Skill::Place, step, FailureReason::StoppedOutOfRange);
        }
        return finish(Skill::Place, step, FailureReason::NoGrasp);
      }
      if (!ctx.rest.matches(w.agent().arm_joints)) return finish(Skill::Place, step, FailureReason::NoRetract);
      return finish(Skill::Place, step, std::nullopt);
    }
    const WorldEvent ev = w.step(a);
    const ObjectInstance* o = w.find(ctx.target_id);
    trace(ctx, Skill::Place, step, arm_json(a),
          {{"object_to_target", distance(o->position, goal)}, {"placed", placed}});
    if (ev.snapped || ev.attached) {
      placed = false;
      if (ev.snapped && *ev.snapped != ctx.target_id) return finish(Skill::Place, step, FailureReason::NoGrasp);
    }
    if (ev.released && *ev.released == ctx.target_id) {
      const Receptacle* rec = w.scene().receptacle_at(o->position);
      const bool on_goal_surface =
          rec != nullptr && goal_rec != nullptr && std::abs(o->support_height - goal_rec->height) <= kThresholdEps;
      const double d = distance3({o->position, o->support_height}, goal, goal_rec ? goal_rec->height : 0.0);
      if (!on_goal_surface || d > ctx.place_threshold + kThresholdEps) {
        return finish(Skill::Place, step, FailureReason::DroppedObject);
      }
      placed = true;
    }
  }
  return finish(Skill::Place, ctx.manip_budget, FailureReason::Timeout);
}

namespace {

SkillOutcome run_articulation(const SkillContext& ctx, ManipController& controller, Skill skill) {
  World& w = *ctx.world;
  controller.reset(ctx, skill);
  bool ever_attached = false;
  bool reached = false;  // door only
  for (int step = 1; step <= ctx.manip_budget; ++step) {
    const ArmAction a = controller.act(ctx);
    const ObjectInstance* o = w.find(ctx.target_id);
    const double angle = o->joint_angle.value_or(0.0);
    const bool attached = w.agent().attached_object == ctx.target_id;
    if (a.stop) {
      trace(ctx, skill, step, arm_json(a), {{"joint_angle", angle}, {"attached", attached}});
      if (!ever_attached) return finish(skill, step, FailureReason::NoGrasp);
      if (skill == Skill::OpenDoor && !reached) return finish(skill, step, FailureReason::JointShort);
      if (skill == Skill::CloseSink && std::abs(angle) > kSinkCloseTolerance + kThresholdEps) {
        return finish(skill, step, FailureReason::AngleOutOfTolerance);
      }
      if (attached || !ctx.rest.matches(w.agent().arm_joints)) return finish(skill, step, FailureReason::NoRetract);
      if (skill == Skill::CloseSink) w.set_emitting(ctx.target_id, false);
      return finish(skill, step, std::nullopt);
    }
    const WorldEvent ev = w.step(a);
    const double now = w.find(ctx.target_id)->joint_angle.value_or(0.0);
    trace(ctx, skill, step, arm_json(a),
          {{"joint_angle", now}, {"attached", w.agent().attached_object == ctx.target_id}});
    if (ev.grasp_missed || ev.snapped || (ev.attached && *ev.attached != ctx.target_id)) {
      return finish(skill, step, FailureReason::NoGrasp);
    }
    if (w.agent().attached_object == ctx.target_id) {
      ever_attached = true;
      if (skill == Skill::OpenDoor && now >= w.door_open_threshold - kThresholdEps) reached = true;
    }
  }
  return finish(skill, ctx.manip_budget, FailureReason::Timeout);
}

}  // namespace

SkillOutcome run_open_door(const SkillContext& ctx, ManipController& controller) {
  return run_articulation(ctx, controller, Skill::OpenDoor);
}

SkillOutcome run_close_sink(const SkillContext& ctx, ManipController& controller) {
  return run_articulation(ctx, controller, Skill::CloseSink);
}

SkillOutcome run_skill(Skill skill, const SkillContext& ctx, const Controllers& c) {
  switch (skill) {
    case Skill::Nav: return run_navigate(ctx, *c.nav);
    case Skill::Pick: return run_pick(ctx, *c.manip);
    case Skill::Place: return run_place(ctx, *c.manip);
    case Skill::OpenDoor: return run_open_door(ctx, *c.manip);
    case Skill::CloseSink: return run_close_sink(ctx, *c.manip);
  }
  throw InvalidChain("unknown skill");
}

ChainResult run_chain(const SkillContext& ctx, const SkillChain& chain, const Controllers& controllers) {
  if (chain.empty()) throw InvalidChain("empty skill chain");
  ChainResult r;
  r.overall = true;
  for (Skill s : chain) {
    if (ctx.trace) ctx.trace->mark("skill_start", {{"skill", to_string(s)}, {"target", ctx.target_id}});
    SkillOutcome o = run_skill(s, ctx, controllers);
    if (ctx.trace) {
      ctx.trace->mark("skill_end", {{"skill", to_string(s)},
                                    {"success", o.success},
                                    {"steps", o.steps},
                                    {"failure", o.failure ? json(to_string(*o.failure)) : json(nullptr)}});
    }
    r.outcomes.push_back(o);
    if (!o.success) {
      r.overall = false;
      break;
    }
  }
  return r;
}

PlanResult run_plan(World& world, const Episode& ep, const Plan& plan, const Controllers& controllers,
                    const SkillContext& base_ctx) {
  std::vector<SkillChain> chains;
  if (const auto* c = std::get_if<SkillChain>(&plan)) {
    chains.push_back(*c);
  } else {
    const auto& b = std::get<BiSonicChain>(plan);
    chains.push_back(b.first_sound);
    chains.push_back(b.second_sound);
  }
  PlanResult out;
  out.overall = true;
  const std::size_t stages = std::min(chains.size(), ep.priority_order.size());
  for (std::size_t k = 0; k < stages; ++k) {
    const EpisodeSource& src = ep.source_in_order(static_cast<int>(k));
    SkillContext ctx = base_ctx;
    ctx.world = &world;
    ctx.episode = &ep;
    ctx.target_id = src.object_id;
    ctx.place_target = src.place_target;
    ChainResult r = run_chain(ctx, chains[k], controllers);
    out.stages.push_back(r);
    if (!r.overall) {
      out.overall = false;
      break;
    }
    // The main source falls silent once its interaction is done.
    if (ep.task == Task::BiSonic && k == 0) world.set_emitting(src.object_id, false);
  }
  if (out.stages.size() != ep.priority_order.size()) out.overall = false;
  return out;
}

}  // namespace soundtrig
