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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <queue>
#include <set>

#include "soundtrig/episodes.hpp"
#include "soundtrig/errors.hpp"
#include "soundtrig/scene_gen.hpp"

using namespace soundtrig;

namespace {

bool is_rigid(Category c) { return c == Category::Phone || c == Category::Alarm || c == Category::Furby; }

const SoundBank& bank() {
  static const SoundBank b = synthesize_bank(7);
  return b;
}

const std::vector<Scene>& pool() {
  static const std::vector<Scene> p = generate_scene_pool(11, 4);
  return p;
}

const Scene& scene_of(const Episode& ep) {
  for (const auto& s : pool()) {
    if (s.id == ep.scene_id) return s;
  }
  throw std::runtime_error("scene not in pool");
}

Episode make(Task t, std::uint64_t seed, Split split = Split::Train) {
  Rng rng(seed);
  return generate_episode(t, pool(), bank(), split, rng, "ep-" + std::to_string(seed));
}

// Exhaustive search over the agent's own motion: every pose reachable from
// the start by MoveForward and quarter turns, starting axis-aligned.
bool flood_reaches(const OccupancyGrid& grid, Vec2 start, const std::vector<Vec2>& goals) {
  if (!grid.point_free(start)) return false;
  auto key = [](const AgentState& s) {
    return std::tuple{std::lround(s.base.x * 1000), std::lround(s.base.y * 1000),
                      std::lround(std::cos(s.heading)), std::lround(std::sin(s.heading))};
  };
  AgentState a;
  a.base = start;
  a.heading = 0.0;
  std::set<decltype(key(a))> seen{key(a)};
  std::queue<AgentState> q;
  q.push(a);
  std::vector<bool> hit(goals.size(), false);
  while (!q.empty()) {
    const AgentState s = q.front();
    q.pop();
    for (std::size_t g = 0; g < goals.size(); ++g) hit[g] = hit[g] || distance(s.base, goals[g]) <= kReachRadius;
    for (NavAction act : {NavAction::MoveForward, NavAction::TurnLeft, NavAction::TurnRight}) {
      const AgentState n = step_agent(s, act, grid).state;
      if (seen.insert(key(n)).second) q.push(n);
    }
  }
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

}  // namespace

TEST(GroundTruth, ChainsPerCategory) {
  EXPECT_EQ(ground_truth_chain(Category::Phone), (SkillChain{Skill::Nav, Skill::Pick, Skill::Place}));
  EXPECT_EQ(ground_truth_chain(Category::Alarm), (SkillChain{Skill::Nav, Skill::Pick, Skill::Place}));
  EXPECT_EQ(ground_truth_chain(Category::Furby), (SkillChain{Skill::Nav, Skill::Pick, Skill::Place}));
  EXPECT_EQ(ground_truth_chain(Category::Doorbell), (SkillChain{Skill::Nav, Skill::OpenDoor}));
  EXPECT_EQ(ground_truth_chain(Category::Sink), (SkillChain{Skill::Nav, Skill::CloseSink}));
}

TEST(Generate, InteractUsesOnlyDoorbellAndSink) {
  std::set<Category> seen;
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Episode ep = generate_episode(Task::SonicInteract, pool(), bank(), Split::Train, rng, "i" + std::to_string(i));
    ASSERT_EQ(ep.sources.size(), 1u);
    seen.insert(ep.sources[0].category);
  }
  EXPECT_EQ(seen, (std::set<Category>{Category::Doorbell, Category::Sink}));
}

TEST(Generate, StowTargetsSitOnReceptacles) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Episode ep = make(Task::SonicStow, s);
    ASSERT_EQ(ep.sources.size(), 1u);
    EXPECT_TRUE(is_rigid(ep.sources[0].category));
    EXPECT_GT(ep.sources[0].height, 0.0);
    EXPECT_EQ(ep.distractors.size(), 2u);
    for (const auto& d : ep.distractors) EXPECT_GT(d.height, 0.0);
  }
}

TEST(Generate, StowCategoriesAreRigid) {
  std::set<Category> seen;
  for (std::uint64_t s = 0; s < 200; ++s) seen.insert(make(Task::SonicStow, s).sources[0].category);
  EXPECT_EQ(seen, (std::set<Category>{Category::Phone, Category::Alarm, Category::Furby}));
}

TEST(Generate, Deterministic) {
  for (Task t : {Task::SonicStow, Task::SonicInteract, Task::BiSonic}) {
    EXPECT_EQ(episode_to_json(make(t, 42)), episode_to_json(make(t, 42)));
  }
}

TEST(Generate, BiSonicHasTwoDistinctOrderedSources) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const Episode ep = make(Task::BiSonic, s);
    ASSERT_EQ(ep.sources.size(), 2u);
    EXPECT_NE(ep.sources[0].category, ep.sources[1].category);
    EXPECT_EQ(std::set<int>(ep.priority_order.begin(), ep.priority_order.end()), (std::set<int>{0, 1}));
    const Plan gt = ep.ground_truth_plan();
    const auto& bi = std::get<BiSonicChain>(gt);
    EXPECT_EQ(bi.first_sound, ground_truth_chain(ep.source_in_order(0).category));
    EXPECT_EQ(bi.second_sound, ground_truth_chain(ep.source_in_order(1).category));
  }
}

TEST(Generate, ClipSplitMatchesEpisodeSplit) {
  for (Split split : {Split::Train, Split::Test}) {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const Episode ep = make(Task::BiSonic, s, split);
      for (const auto& src : ep.sources) EXPECT_EQ(bank().find(src.clip_id)->split, split);
    }
  }
}

TEST(Generate, DoorbellsAreBoundToDoors) {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const Episode ep = make(Task::SonicInteract, s);
    const auto& src = ep.sources[0];
    if (src.category != Category::Doorbell) continue;
    const DoorSpec* d = scene_of(ep).find_door(src.bound_to);
    ASSERT_NE(d, nullptr);
    EXPECT_NEAR(distance(d->handle, src.position), 0.0, 1e-12);
  }
}

TEST(Generate, ExhaustsWithoutReceptacles) {
  const std::vector<Scene> bare{make_empty_room("bare", 4, 4)};
  Rng rng(1);
  GenerationOptions opt;
  opt.max_retries = 5;
  EXPECT_THROW(generate_episode(Task::SonicStow, bare, bank(), Split::Train, rng, "x", opt), GenerationExhausted);
}

TEST(Validate, AgreesWithFloodFillOracle) {
  Rng rng(77);
  int unreachable = 0;
  for (int i = 0; i < 50; ++i) {
    Episode ep = make(static_cast<Task>(i % 3), 1000 + i);
    const Scene& base = scene_of(ep);
    const Scene scene = episode_scene(base, ep);
    const OccupancyGrid grid = build_occupancy_grid(scene);
    // Move the start anywhere in the bounds so some land in closed rooms or obstacles.
    ep.agent_start = {rng.uniform(base.bounds.min.x, base.bounds.max.x), rng.uniform(base.bounds.min.y, base.bounds.max.y)};
    std::vector<Vec2> goals;
    for (const auto& s : ep.sources) goals.push_back(s.position);
    const bool oracle = flood_reaches(grid, ep.agent_start, goals);
    const ValidationReport rep = validate_episode(ep, base);
    EXPECT_EQ(!rep.has(ValidationReason::Unreachable), oracle) << ep.episode_id;
    unreachable += oracle ? 0 : 1;
  }
  EXPECT_GT(unreachable, 0);
  EXPECT_LT(unreachable, 50);
}

TEST(Validate, GeneratedEpisodesPass) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (Task t : {Task::SonicStow, Task::SonicInteract, Task::BiSonic}) {
      const Episode ep = make(t, s);
      EXPECT_TRUE(validate_episode(ep, scene_of(ep)).pass) << to_string(t) << " " << s;
    }
  }
}

TEST(Validate, WalledOffSourceIsUnreachable) {
  const Episode ep = make(Task::SonicStow, 3);
  Scene base = scene_of(ep);
  const Vec2 p = ep.sources[0].position;
  const double r = 1.0;
  const Vec2 c[4] = {{p.x - r, p.y - r}, {p.x + r, p.y - r}, {p.x + r, p.y + r}, {p.x - r, p.y + r}};
  for (int k = 0; k < 4; ++k) base.walls.push_back({c[k], c[(k + 1) % 4], "plaster"});
  // Keep the start outside the box.
  Episode moved = ep;
  if (std::abs(moved.agent_start.x - p.x) < r + 0.3 && std::abs(moved.agent_start.y - p.y) < r + 0.3) {
    GTEST_SKIP() << "start inside the box";
  }
  const ValidationReport rep = validate_episode(moved, base);
  EXPECT_FALSE(rep.pass);
  EXPECT_TRUE(rep.has(ValidationReason::Unreachable));
}

TEST(Validate, SinkFacingWallHasNoFrontalAccess) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Episode ep = make(Task::SonicInteract, s);
    if (ep.sources[0].category != Category::Sink) continue;
    Scene base = scene_of(ep);
    const Rect front = sink_frontal_region(*ep.sink);
    const Vec2 n = ep.sink->front_normal();
    // A wall across the middle of the frontal rectangle, parallel to the sink front.
    const Vec2 mid = (front.min + front.max) * 0.5;
    const Vec2 along{-n.y, n.x};
    const double half = 0.5 * ep.sink->front_width() + 0.5;
    base.walls.push_back({mid - along * half, mid + along * half, "plaster"});
    const ValidationReport rep = validate_episode(ep, base);
    EXPECT_TRUE(rep.has(ValidationReason::NoFrontalAccess));
    return;
  }
  FAIL() << "no sink episode drawn";
}

TEST(Validate, SceneMismatch) {
  const Episode ep = make(Task::SonicStow, 1);
  Scene other = scene_of(ep);
  other.id = "elsewhere";
  EXPECT_TRUE(validate_episode(ep, other).has(ValidationReason::SceneMismatch));
}

TEST(Serialize, JsonRoundTrip) {
  for (Task t : {Task::SonicStow, Task::SonicInteract, Task::BiSonic}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Episode ep = make(t, s);
      const auto j = episode_to_json(ep);
      EXPECT_EQ(episode_to_json(episode_from_json(j)), j);
    }
  }
}

TEST(Serialize, CorruptFileRejectedOnLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "soundtrig_episodes_test";
  std::filesystem::create_directories(dir);
  std::map<std::string, Scene> scenes;
  for (const auto& s : pool()) scenes[s.id] = s;
  std::vector<Episode> eps{make(Task::SonicStow, 1), make(Task::SonicInteract, 2)};
  write_episodes(dir / "ok.jsonl", eps);
  const auto back = read_episodes(dir / "ok.jsonl", scenes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(episode_to_json(back[1]), episode_to_json(eps[1]));

  // Push the agent start outside the scene.
  eps[0].agent_start = {-50, -50};
  write_episodes(dir / "bad.jsonl", eps);
  EXPECT_THROW(read_episodes(dir / "bad.jsonl", scenes), FormatError);
  {
    std::ofstream f(dir / "junk.jsonl");
    f << "{not json\n";
  }
  EXPECT_THROW(read_episodes(dir / "junk.jsonl", scenes), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, PresetCounts) {
  EXPECT_EQ(preset_counts(Preset::Paper, Task::SonicStow).train, 660);
  EXPECT_EQ(preset_counts(Preset::Paper, Task::SonicInteract).train, 660);
  EXPECT_EQ(preset_counts(Preset::Paper, Task::BiSonic).train, 660);
  EXPECT_EQ(preset_counts(Preset::Paper, Task::SonicStow).test, 222);
  EXPECT_EQ(preset_counts(Preset::Paper, Task::SonicInteract).test, 222);
  EXPECT_EQ(preset_counts(Preset::Paper, Task::BiSonic).test, 355);
  // Desk preset keeps the train/test ratio.
  for (Task t : {Task::SonicStow, Task::BiSonic}) {
    const auto p = preset_counts(Preset::Paper, t), d = preset_counts(Preset::Desk, t);
    EXPECT_NEAR(static_cast<double>(d.test) / d.train, static_cast<double>(p.test) / p.train, 0.01);
  }
}

TEST(Dataset, DeskDatasetWriteReadIsIdentical) {
  const Dataset ds = generate_dataset(Task::SonicInteract, Preset::Desk, 9, bank(), 2);
  EXPECT_EQ(static_cast<int>(ds.train.size()), preset_counts(Preset::Desk, Task::SonicInteract).train);
  EXPECT_EQ(static_cast<int>(ds.test.size()), preset_counts(Preset::Desk, Task::SonicInteract).test);
  const auto dir = std::filesystem::temp_directory_path() / "soundtrig_dataset_test";
  std::filesystem::remove_all(dir);
  write_dataset(ds, dir);
  const Dataset back = read_dataset(dir);
  ASSERT_EQ(back.train.size(), ds.train.size());
  for (std::size_t i = 0; i < ds.train.size(); ++i) EXPECT_EQ(episode_to_json(back.train[i]), episode_to_json(ds.train[i]));
  EXPECT_EQ(back.manifest.to_json(), ds.manifest.to_json());
  std::filesystem::remove_all(dir);
  // Same seed, different job count: same episodes.
  const Dataset serial = generate_dataset(Task::SonicInteract, Preset::Desk, 9, bank(), 1);
  for (std::size_t i = 0; i < ds.test.size(); ++i) EXPECT_EQ(episode_to_json(serial.test[i]), episode_to_json(ds.test[i]));
}
