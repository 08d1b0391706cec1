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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "soundtrig/rng.hpp"
#include "soundtrig/skill_chain.hpp"
#include "soundtrig/soundbank.hpp"
#include "soundtrig/world.hpp"

namespace soundtrig {

enum class Task { SonicStow, SonicInteract, BiSonic };
std::string_view to_string(Task t);
// Accepts the long names and the CLI short forms stow / interact / bisonic.
Task task_from_string(std::string_view s);
std::vector<Category> legal_categories(Task t);

SkillChain ground_truth_chain(Category c);

inline constexpr double kFrontalDepth = 0.8;
inline constexpr double kReachRadius = 0.5;
inline constexpr int kDefaultGenerationRetries = 100;

struct EpisodeSource {
  std::string object_id;
  Category category = Category::Alarm;
  std::string clip_id;
  Vec2 position;  // grasp point: object, door handle or faucet handle pivot
  double height = 0.0;
  double orientation = 0.0;
  std::string receptacle_id;         // rigid sources
  std::string bound_to;              // door or sink id
  std::optional<Vec2> place_target;  // rigid sources
  double initial_joint = 0.0;        // articulated sources
};

struct Distractor {
  std::string object_id;
  Vec2 position;
  double height = 0.0;
  std::string receptacle_id;
};

struct Episode {
  std::string episode_id;
  Task task = Task::SonicStow;
  std::string scene_id;
  Split split = Split::Train;
  Vec2 agent_start;
  double agent_heading = 0.0;
  std::vector<EpisodeSource> sources;
  std::vector<int> priority_order;  // indices into sources, main source first
  std::vector<Distractor> distractors;
  std::optional<SinkSpec> sink;
  std::vector<SkillChain> ground_truth;  // aligned with sources

  const EpisodeSource& source_in_order(int rank) const { return sources.at(priority_order.at(rank)); }
  Plan ground_truth_plan() const;
};

// Scene copy with the episode's sink inserted.
Scene episode_scene(const Scene& base, const Episode& ep);
std::vector<ObjectInstance> episode_objects(const Episode& ep, const Scene& scene);
AgentState episode_agent(const Episode& ep);

enum class ValidationReason { Unreachable, NoFrontalAccess, InvalidPlacement, SceneMismatch };
std::string_view to_string(ValidationReason r);

struct ValidationReport {
  bool pass = true;
  std::vector<std::pair<ValidationReason, std::string>> failures;
  bool has(ValidationReason r) const;
};

// Frontal rectangle (kFrontalDepth deep) in front of a door or sink.
Rect frontal_region(Vec2 edge_a, Vec2 edge_b, Vec2 normal, double depth = kFrontalDepth);
Rect sink_frontal_region(const SinkSpec& s, double depth = kFrontalDepth);
Rect door_frontal_region(const DoorSpec& d, double depth = kFrontalDepth);

ValidationReport validate_episode(const Episode& ep, const Scene& base_scene);

struct GenerationOptions {
  int max_retries = kDefaultGenerationRetries;
  bool distinct_bisonic_categories = true;
};

Episode generate_episode(Task task, const std::vector<Scene>& scenes, const SoundBank& bank,
                         Split split, Rng& rng, const std::string& episode_id,
                         const GenerationOptions& options = {});

nlohmann::json episode_to_json(const Episode& ep);
Episode episode_from_json(const nlohmann::json& j);

void write_episodes(const std::filesystem::path& path, const std::vector<Episode>& eps);
// Every loaded episode is re-validated against its scene; failures throw FormatError.
std::vector<Episode> read_episodes(const std::filesystem::path& path,
                                   const std::map<std::string, Scene>& scenes);

enum class Preset { Paper, Desk };
std::string_view to_string(Preset p);
Preset preset_from_string(std::string_view s);

struct PresetCounts {
  int train = 0;
  int test = 0;
};
PresetCounts preset_counts(Preset p, Task t);
int preset_scene_count(Preset p);

struct DatasetManifest {
  Task task = Task::SonicStow;
  Preset preset = Preset::Desk;
  std::uint64_t seed = 0;
  std::uint64_t bank_seed = 0;
  int train_episodes = 0;
  int test_episodes = 0;
  std::string train_file;
  std::string test_file;
  std::vector<std::string> scene_files;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Scene> scenes;
  std::vector<Episode> train;
  std::vector<Episode> test;

  std::map<std::string, Scene> scene_map() const;
};

// Deterministic in (task, preset, seed); the bank seed is recorded in the manifest.
Dataset generate_dataset(Task task, Preset preset, std::uint64_t seed, const SoundBank& bank,
                         int jobs = 1);
DatasetManifest manifest_for(Task task, Preset preset, std::uint64_t seed, std::uint64_t bank_seed);
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir_or_manifest);

}  // namespace soundtrig
