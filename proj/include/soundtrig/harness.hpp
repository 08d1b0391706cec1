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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "soundtrig/episodes.hpp"
#include "soundtrig/learning.hpp"
#include "soundtrig/nav_env.hpp"
#include "soundtrig/perception.hpp"
#include "soundtrig/planner.hpp"
#include "soundtrig/remote_planner.hpp"
#include "soundtrig/skills.hpp"
#include "soundtrig/soundbank.hpp"

namespace soundtrig {

enum class ControllerSet { Oracle, Trained };
std::string_view to_string(ControllerSet c);
ControllerSet controller_set_from_string(std::string_view s);

struct PlannerBackend {
  Backend kind = Backend::Oracle;
  const CategoryClassifier* classifier = nullptr;  // RuleBased
  RemoteConfig remote;                              // Remote
  TokenBucket* bucket = nullptr;
  TranscriptLog* transcripts = nullptr;
};

struct ControllerSpec {
  ControllerSet kind = ControllerSet::Oracle;
  const PolicyNet* policy = nullptr;  // Trained
  NavEnvConfig nav;
};

struct EpisodeContext {
  const Scene* scene = nullptr;
  const SoundBank* bank = nullptr;
  PlannerBackend planner;
  ControllerSpec controllers;
};

struct EpisodeRecord {
  std::string episode_id;
  Task task = Task::SonicStow;
  bool skipped = false;
  std::string skip_reason;
  std::optional<Plan> plan;              // absent when the planner produced no valid chain
  std::optional<std::string> plan_error;  // PlanInvalid / PlanParse message
  bool planner_fallback = false;
  std::vector<bool> planning_correct;  // per stage
  std::vector<std::vector<SkillOutcome>> stages;
  bool overall = false;

  int stage_count() const { return task == Task::BiSonic ? 2 : 1; }
  nlohmann::json to_json() const;
  static EpisodeRecord from_json(const nlohmann::json& j);
};

/// Plans, validates, and executes one episode. A wrong plan is still executed
/// so per-skill columns stay populated; Transport errors yield a skipped record.
EpisodeRecord run_episode(const Episode& ep, const EpisodeContext& ctx, TraceLog* trace = nullptr);

/// Worker pool over episodes; records come back in input order.
std::vector<EpisodeRecord> run_episodes(const std::vector<Episode>& episodes,
                                        const std::map<std::string, Scene>& scenes, const EpisodeContext& ctx,
                                        int jobs);

inline constexpr std::array<const char*, 7> kReportColumns = {
    "Task Planning", "Navigate", "Pick", "Place", "Open Door", "Close Sink", "Overall"};

struct RateCell {
  int successes = 0;
  int attempts = 0;
  /// Percentage; NaN without attempts.
  double rate() const;
  bool operator==(const RateCell&) const = default;
};

struct StageStats {
  RateCell planning;
  std::array<RateCell, 5> skills;  // indexed by Skill
  RateCell overall;
  bool operator==(const StageStats&) const = default;
};

struct EvalReport {
  Task task = Task::SonicStow;
  std::string planner;
  std::string controllers;
  int episodes = 0;  // non-skipped
  int skipped = 0;
  std::vector<StageStats> stages;  // one, or two for BiSonic

  const RateCell& cell(int stage, int column) const;
  bool operator==(const EvalReport&) const = default;
};

/// Throws EmptyRun when every record is skipped.
EvalReport aggregate(const std::vector<EpisodeRecord>& records, Task task, const std::string& planner,
                     const std::string& controllers);

std::string format_cell(const EvalReport& r, int column);
std::string format_report_table(const EvalReport& r);
std::string report_csv(const EvalReport& r);
EvalReport parse_report_csv(const std::string& text);
void write_report(const EvalReport& r, const std::filesystem::path& dir);
EvalReport read_report_csv(const std::filesystem::path& path);

void write_records(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path);
std::vector<EpisodeRecord> read_records(const std::filesystem::path& path);

struct TraceBoundary {
  std::size_t index = 0;  // trajectory point where the skill starts
  std::string skill;
  bool success = false;
};

struct TraceArtifact {
  std::string episode_id;
  std::vector<Vec2> trajectory;  // start pose plus one point per executed step
  std::vector<TraceBoundary> boundaries;
  std::vector<std::pair<Vec2, std::string>> sources;
  std::vector<std::string> annotations;
  std::size_t step_count = 0;
};

TraceArtifact make_trace(const Episode& ep, const TraceLog& log, const EpisodeRecord& record);
std::string render_trace_svg(const TraceArtifact& trace, const Scene& scene);

struct RunConfig {
  Task task = Task::SonicStow;
  std::filesystem::path dataset;  // directory or manifest.json
  std::string split = "test";
  Backend planner = Backend::Oracle;
  RemoteConfig remote;
  std::filesystem::path transcripts;  // remote transcripts; empty = out_dir/transcripts.jsonl
  ControllerSet controllers = ControllerSet::Oracle;
  std::filesystem::path policy;  // trained navigate checkpoint
  NavEnvConfig nav;
  std::uint64_t seed = 0;
  int jobs = 1;
  int limit = 0;  // 0 = all episodes
  std::filesystem::path out_dir = "out";

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  /// Throws FormatError / IoFailure for missing paths or bad combinations.
  void validate() const;
};

struct RunOutput {
  std::vector<EpisodeRecord> records;
  EvalReport report;
};

RunOutput run_evaluation(const RunConfig& config);

}  // namespace soundtrig
