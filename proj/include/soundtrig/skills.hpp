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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "soundtrig/episodes.hpp"
#include "soundtrig/skill_chain.hpp"
#include "soundtrig/world.hpp"

namespace soundtrig {

inline constexpr int kNavBudget = 500;
inline constexpr int kManipBudget = 200;
inline constexpr double kDefaultPlaceThreshold = 0.15;

enum class FailureReason {
  Timeout,
  StoppedOutOfRange,
  NoGrasp,
  DroppedObject,
  NoRetract,
  JointShort,
  AngleOutOfTolerance
};
std::string_view to_string(FailureReason r);
FailureReason failure_from_string(std::string_view s);

struct SkillOutcome {
  Skill skill = Skill::Nav;
  bool success = false;
  int steps = 0;
  std::optional<FailureReason> failure;
};

// JSON-lines per-step log: step, action, pose, predicate state.
class TraceLog {
 public:
  void record(const std::string& skill, int step, const nlohmann::json& action, const World& world,
              const nlohmann::json& predicate);
  void mark(const std::string& event, const nlohmann::json& detail);
  const std::vector<nlohmann::json>& lines() const { return lines_; }
  void write(const std::filesystem::path& path) const;
  std::string episode_id;

 private:
  std::vector<nlohmann::json> lines_;
};

struct SkillContext {
  World* world = nullptr;
  std::string target_id;
  std::optional<Vec2> place_target;
  double place_threshold = kDefaultPlaceThreshold;
  int nav_budget = kNavBudget;
  int manip_budget = kManipBudget;
  RestingPose rest;
  TraceLog* trace = nullptr;
  const Episode* episode = nullptr;
};

class NavController {
 public:
  virtual ~NavController() = default;
  virtual void reset(const SkillContext& ctx) { (void)ctx; }
  virtual NavAction act(const SkillContext& ctx) = 0;
};

class ManipController {
 public:
  virtual ~ManipController() = default;
  virtual void reset(const SkillContext& ctx, Skill skill) {
    (void)ctx;
    (void)skill;
  }
  virtual ArmAction act(const SkillContext& ctx) = 0;
};

// Position used by Navigate for the target object.
Vec2 target_position(const World& world, const std::string& target_id);

SkillOutcome run_navigate(const SkillContext& ctx, NavController& controller);
SkillOutcome run_pick(const SkillContext& ctx, ManipController& controller);
SkillOutcome run_place(const SkillContext& ctx, ManipController& controller);
SkillOutcome run_open_door(const SkillContext& ctx, ManipController& controller);
SkillOutcome run_close_sink(const SkillContext& ctx, ManipController& controller);

struct Controllers {
  NavController* nav = nullptr;
  ManipController* manip = nullptr;
};

SkillOutcome run_skill(Skill skill, const SkillContext& ctx, const Controllers& controllers);

struct ChainResult {
  std::vector<SkillOutcome> outcomes;
  bool overall = false;
};

// Runs the chain in order against one target, stopping at the first failure.
ChainResult run_chain(const SkillContext& ctx, const SkillChain& chain, const Controllers& controllers);

struct PlanResult {
  std::vector<ChainResult> stages;  // one per source in priority order; absent if not reached
  bool overall = false;
};

// Executes the plan on an episode world. For BiSonic, the first source's
// emission is cleared once its chain succeeds, before the second chain runs.
PlanResult run_plan(World& world, const Episode& ep, const Plan& plan, const Controllers& controllers,
                    const SkillContext& base_ctx = {});

}  // namespace soundtrig
