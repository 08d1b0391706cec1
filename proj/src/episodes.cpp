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


#include "soundtrig/episodes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include "soundtrig/errors.hpp"
#include "soundtrig/pathfinding.hpp"
#include "soundtrig/scene_gen.hpp"
#include "soundtrig/scene_io.hpp"

namespace soundtrig {

using nlohmann::json;

std::string_view to_string(Task t) {
  switch (t) {
    case Task::SonicStow: return "SonicStow";
    case Task::SonicInteract: return "SonicInteract";
    case Task::BiSonic: return "BiSonic";
  }
  return "?";
}

Task task_from_string(std::string_view s) {
  if (s == "SonicStow" || s == "stow") return Task::SonicStow;
  if (s == "SonicInteract" || s == "interact") return Task::SonicInteract;
  if (s == "BiSonic" || s == "bisonic") return Task::BiSonic;
  throw FormatError("unknown task: " + std::string(s));
}

std::vector<Category> legal_categories(Task t) {
  switch (t) {
    case Task::SonicStow: return {Category::Phone, Category::Alarm, Category::Furby};
    case Task::SonicInteract: return {Category::Doorbell, Category::Sink};
    case Task::BiSonic:
      return {Category::Phone, Category::Alarm, Category::Furby, Category::Doorbell, Category::Sink};
  }
  return {};
}

SkillChain ground_truth_chain(Category c) {
  switch (c) {
    case Category::Alarm:
    case Category::Phone:
    case Category::Furby: return {Skill::Nav, Skill::Pick, Skill::Place};
    case Category::Doorbell: return {Skill::Nav, Skill::OpenDoor};
    case Category::Sink: return {Skill::Nav, Skill::CloseSink};
    case Category::Distractor: break;
  }
  throw UnknownCategory("no skill chain for category " + std::string(to_string(c)));
}

Plan Episode::ground_truth_plan() const {
  if (task == Task::BiSonic) {
    return BiSonicChain{ground_truth.at(priority_order.at(0)), ground_truth.at(priority_order.at(1))};
  }
  return ground_truth.at(0);
}

namespace {

constexpr double kSinkFrontWidth = 0.75;
constexpr double kSinkDepth = 0.5;
constexpr double kSinkHandleInset = 0.05;
constexpr std::array<double, 2> kSinkHandleLimits = {0.0, 1.6};
constexpr std::array<double, 2> kDoorLimits = {0.0, std::numbers::pi / 2};
constexpr double kObjectSpacing = 0.3;
constexpr double kTopMargin = 0.1;

bool is_rigid(Category c) {
  return c == Category::Phone || c == Category::Alarm || c == Category::Furby ||
         c == Category::Distractor;
}

Rect shrink(const Rect& r, double m) { return {r.min + Vec2{m, m}, r.max - Vec2{m, m}}; }

}  // namespace

Scene episode_scene(const Scene& base, const Episode& ep) {
  Scene s = base;
  if (ep.sink) s.sinks.push_back(*ep.sink);
  return s;
}

std::vector<ObjectInstance> episode_objects(const Episode& ep, const Scene& scene) {
  std::vector<ObjectInstance> out;
  for (const auto& src : ep.sources) {
    ObjectInstance o;
    o.id = src.object_id;
    o.category = src.category;
    o.position = src.position;
    o.support_height = src.height;
    o.orientation = src.orientation;
    o.sound_clip_id = src.clip_id;
    o.emitting = true;
    o.bound_to = src.bound_to;
    if (is_rigid(src.category)) {
      o.kind = ObjectKind::Rigid;
    } else {
      o.kind = ObjectKind::Articulated;
      o.joint_angle = src.initial_joint;
      o.joint_limits = src.category == Category::Sink ? kSinkHandleLimits : kDoorLimits;
      if (src.category == Category::Sink) {
        o.emitting = src.initial_joint > kSinkCloseTolerance + kThresholdEps;
      }
    }
    out.push_back(std::move(o));
  }
  for (const auto& d : ep.distractors) {
    ObjectInstance o;
    o.id = d.object_id;
    o.category = Category::Distractor;
    o.kind = ObjectKind::Rigid;
    o.position = d.position;
    o.support_height = d.height;
    out.push_back(std::move(o));
  }
  (void)scene;
  return out;
}

AgentState episode_agent(const Episode& ep) {
  AgentState a;
  a.base = ep.agent_start;
  a.heading = ep.agent_heading;
  return a;
}

std::string_view to_string(ValidationReason r) {
  switch (r) {
    case ValidationReason::Unreachable: return "Unreachable";
    case ValidationReason::NoFrontalAccess: return "NoFrontalAccess";
    case ValidationReason::InvalidPlacement: return "InvalidPlacement";
    case ValidationReason::SceneMismatch: return "SceneMismatch";
  }
  return "?";
}

bool ValidationReport::has(ValidationReason r) const {
  return std::any_of(failures.begin(), failures.end(), [&](const auto& f) { return f.first == r; });
}

Rect frontal_region(Vec2 a, Vec2 b, Vec2 normal, double depth) {
  const Vec2 fa = a + normal * depth;
  const Vec2 fb = b + normal * depth;
  return {{std::min({a.x, b.x, fa.x, fb.x}), std::min({a.y, b.y, fa.y, fb.y})},
          {std::max({a.x, b.x, fa.x, fb.x}), std::max({a.y, b.y, fa.y, fb.y})}};
}

Rect sink_frontal_region(const SinkSpec& s, double depth) {
  const Vec2 n = s.front_normal();
  const Vec2 c = s.footprint.center();
  const double half_depth = std::abs(n.x) > 0.5 ? s.footprint.width() / 2 : s.footprint.height() / 2;
  const double half_width = s.front_width() / 2;
  const Vec2 t{-n.y, n.x};
  const Vec2 mid = c + n * half_depth;
  return frontal_region(mid - t * half_width, mid + t * half_width, n, depth);
}

Rect door_frontal_region(const DoorSpec& d, double depth) {
  return frontal_region(d.hinge, d.leaf_end, d.front_normal(), depth);
}

namespace {

// Every cell whose center lies inside the region must be free.
bool region_free(const OccupancyGrid& grid, const Rect& region) {
  bool any = false;
  for (int j = 0; j < grid.rows(); ++j) {
    for (int i = 0; i < grid.cols(); ++i) {
      const Vec2 c = grid.center_of(i, j);
      if (!region.contains(c)) continue;
      any = true;
      if (grid.blocked(i, j)) return false;
    }
  }
  return any;
}

bool sink_footprint_clear(const Scene& base, const SinkSpec& sink) {
  if (!base.bounds.contains(sink.footprint)) return false;
  for (const Rect& r : obstacle_rects(base)) {
    if (overlaps_with_area(r, sink.footprint)) return false;
  }
  for (const auto& d : base.doors) {
    if (overlaps_with_area(door_frontal_region(d), sink.footprint)) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_episode(const Episode& ep, const Scene& base) {
  ValidationReport rep;
  auto fail = [&](ValidationReason r, std::string why) {
    rep.pass = false;
    rep.failures.emplace_back(r, std::move(why));
  };
  if (ep.scene_id != base.id) {
    fail(ValidationReason::SceneMismatch, "episode scene " + ep.scene_id + " != " + base.id);
    return rep;
  }
  const std::size_t want_sources = ep.task == Task::BiSonic ? 2 : 1;
  if (ep.sources.size() != want_sources || ep.priority_order.size() != want_sources ||
      ep.ground_truth.size() != want_sources) {
    fail(ValidationReason::InvalidPlacement, "wrong source count for task");
    return rep;
  }
  const auto legal = legal_categories(ep.task);
  for (const auto& src : ep.sources) {
    if (std::find(legal.begin(), legal.end(), src.category) == legal.end()) {
      fail(ValidationReason::InvalidPlacement, "category not legal for task");
    }
  }
  if (ep.task == Task::BiSonic && ep.sources[0].category == ep.sources[1].category) {
    // Same-category pairs are allowed only for rigid sources.
    if (!is_rigid(ep.sources[0].category)) {
      fail(ValidationReason::InvalidPlacement, "duplicate articulated source");
    }
  }
  const std::size_t want_distractors = ep.task == Task::SonicInteract ? 0 : 2;
  if (ep.distractors.size() != want_distractors) {
    fail(ValidationReason::InvalidPlacement, "wrong distractor count");
  }
  if (!rep.pass) return rep;

  const Scene scene = episode_scene(base, ep);
  for (const auto& src : ep.sources) {
    if (is_rigid(src.category)) {
      const Receptacle* r = base.find_receptacle(src.receptacle_id);
      if (!r || !r->top.contains(src.position) || std::abs(r->height - src.height) > 1e-9) {
        fail(ValidationReason::InvalidPlacement, src.object_id + " is not on its receptacle");
      } else if (!src.place_target || !r->top.contains(*src.place_target)) {
        fail(ValidationReason::InvalidPlacement, src.object_id + " has no place target on its receptacle");
      }
    } else if (src.category == Category::Doorbell) {
      const DoorSpec* d = base.find_door(src.bound_to);
      if (!d || distance(d->handle, src.position) > 1e-9) {
        fail(ValidationReason::InvalidPlacement, src.object_id + " is not on a door handle");
      }
    } else if (src.category == Category::Sink) {
      if (!ep.sink || ep.sink->id != src.bound_to) {
        fail(ValidationReason::InvalidPlacement, src.object_id + " has no sink");
      } else if (!sink_footprint_clear(base, *ep.sink)) {
        fail(ValidationReason::InvalidPlacement, "sink footprint overlaps the scene");
      } else if (src.initial_joint <= kSinkCloseTolerance) {
        fail(ValidationReason::InvalidPlacement, "sink handle starts closed");
      }
    }
  }
  for (const auto& d : ep.distractors) {
    const Receptacle* r = base.find_receptacle(d.receptacle_id);
    if (!r || !r->top.contains(d.position)) {
      fail(ValidationReason::InvalidPlacement, d.object_id + " is not on its receptacle");
    }
  }
  if (!rep.pass) return rep;

  const OccupancyGrid grid = build_occupancy_grid(scene);
  if (!grid.point_free(ep.agent_start)) {
    fail(ValidationReason::Unreachable, "agent start is blocked");
    return rep;
  }
  for (const auto& src : ep.sources) {
    if (!plan_lattice_path(grid, ep.agent_start, src.position, kReachRadius)) {
      fail(ValidationReason::Unreachable, src.object_id + " cannot be reached");
    }
    if (src.category == Category::Sink && ep.sink) {
      GridOptions opt;
      opt.exclude.insert(ep.sink->id);
      if (!region_free(build_occupancy_grid(scene, opt), sink_frontal_region(*ep.sink))) {
        fail(ValidationReason::NoFrontalAccess, ep.sink->id + " frontal region is occupied");
      }
    } else if (src.category == Category::Doorbell) {
      if (const DoorSpec* d = base.find_door(src.bound_to)) {
        GridOptions opt;
        opt.exclude.insert(d->id);
        if (!region_free(build_occupancy_grid(scene, opt), door_frontal_region(*d))) {
          fail(ValidationReason::NoFrontalAccess, d->id + " frontal region is occupied");
        }
      }
    }
  }
  return rep;
}

namespace {

std::optional<Vec2> point_on(const Rect& top, Rng& rng) {
  const Rect inner = shrink(top, kTopMargin);
  if (inner.width() <= 0 || inner.height() <= 0) return std::nullopt;
  return Vec2{rng.uniform(inner.min.x, inner.max.x), rng.uniform(inner.min.y, inner.max.y)};
}

bool spaced(Vec2 p, const std::vector<Vec2>& taken) {
  return std::all_of(taken.begin(), taken.end(), [&](Vec2 q) { return distance(p, q) >= kObjectSpacing; });
}

std::optional<SinkSpec> place_sink(const Scene& base, Rng& rng) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    SinkSpec s;
    s.id = "sink_0";
    const int quarter = static_cast<int>(rng.index(4));
    s.orientation = wrap_angle(quarter * std::numbers::pi / 2);
    const bool faces_x = quarter % 2 == 0;
    const Vec2 size = faces_x ? Vec2{kSinkDepth, kSinkFrontWidth} : Vec2{kSinkFrontWidth, kSinkDepth};
    const double cs = base.cell_size;
    const int nx = static_cast<int>(std::floor((base.bounds.width() - size.x) / cs));
    const int ny = static_cast<int>(std::floor((base.bounds.height() - size.y) / cs));
    if (nx < 0 || ny < 0) return std::nullopt;
    const Vec2 lo = base.bounds.min + Vec2{cs * static_cast<double>(rng.index(nx + 1)),
                                           cs * static_cast<double>(rng.index(ny + 1))};
    s.footprint = {lo, lo + size};
    const Vec2 n = s.front_normal();
    const Vec2 c = s.footprint.center();
    s.handle_pivot = c + n * (kSinkDepth / 2 - kSinkHandleInset);
    s.handle_height = 0.85;
    if (sink_footprint_clear(base, s)) return s;
  }
  return std::nullopt;
}

std::optional<Episode> try_generate(Task task, const Scene& scene, const SoundBank& bank, Split split,
                                    Rng& rng, const std::string& episode_id,
                                    const GenerationOptions& options) {
  Episode ep;
  ep.episode_id = episode_id;
  ep.task = task;
  ep.scene_id = scene.id;
  ep.split = split;

  const auto legal = legal_categories(task);
  std::vector<Category> cats;
  cats.push_back(legal[rng.index(legal.size())]);
  if (task == Task::BiSonic) {
    Category second = legal[rng.index(legal.size())];
    if (options.distinct_bisonic_categories || !is_rigid(second)) {
      while (second == cats[0]) second = legal[rng.index(legal.size())];
    }
    cats.push_back(second);
  }

  std::vector<Vec2> taken;
  for (std::size_t k = 0; k < cats.size(); ++k) {
    const Category cat = cats[k];
    const auto clips = bank.select(cat, split);
    if (clips.empty()) return std::nullopt;
    EpisodeSource src;
    src.category = cat;
    src.clip_id = clips[rng.index(clips.size())]->clip_id;
    src.object_id = "source_" + std::to_string(k);
    if (is_rigid(cat)) {
      if (scene.receptacles.empty()) return std::nullopt;
      const Receptacle& r = scene.receptacles[rng.index(scene.receptacles.size())];
      const auto p = point_on(r.top, rng);
      if (!p || !spaced(*p, taken)) return std::nullopt;
      src.position = *p;
      src.height = r.height;
      src.receptacle_id = r.id;
      src.orientation = rng.uniform(-std::numbers::pi, std::numbers::pi);
      // Place target on the same surface, 0.15-0.3 m away.
      const Rect inner = shrink(r.top, 0.05);
      for (int t = 0; t < 30 && !src.place_target; ++t) {
        const double a = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const Vec2 q = *p + heading_vector(a) * rng.uniform(0.15, 0.3);
        if (inner.contains(q)) src.place_target = q;
      }
      if (!src.place_target) return std::nullopt;
      taken.push_back(src.position);
      taken.push_back(*src.place_target);
    } else if (cat == Category::Doorbell) {
      if (scene.doors.empty()) return std::nullopt;
      const DoorSpec& d = scene.doors[rng.index(scene.doors.size())];
      src.position = d.handle;
      src.height = d.handle_height;
      src.bound_to = d.id;
      src.initial_joint = 0.0;
    } else {
      const auto sink = place_sink(scene, rng);
      if (!sink) return std::nullopt;
      ep.sink = sink;
      src.position = sink->handle_pivot;
      src.height = sink->handle_height;
      src.orientation = sink->orientation;
      src.bound_to = sink->id;
      src.initial_joint = std::round(rng.uniform(0.5, 1.2) * 1e3) / 1e3;
    }
    ep.ground_truth.push_back(ground_truth_chain(cat));
    ep.sources.push_back(std::move(src));
    ep.priority_order.push_back(static_cast<int>(k));
  }

  if (task != Task::SonicInteract) {
    for (int k = 0; k < 2; ++k) {
      const Receptacle& r = scene.receptacles[rng.index(scene.receptacles.size())];
      const auto p = point_on(r.top, rng);
      if (!p || !spaced(*p, taken)) return std::nullopt;
      taken.push_back(*p);
      ep.distractors.push_back({"distractor_" + std::to_string(k), *p, r.height, r.id});
    }
  }

  const OccupancyGrid grid = build_occupancy_grid(episode_scene(scene, ep));
  std::vector<std::array<int, 2>> free_cells;
  for (int j = 0; j < grid.rows(); ++j) {
    for (int i = 0; i < grid.cols(); ++i) {
      if (grid.free(i, j)) free_cells.push_back({i, j});
    }
  }
  if (free_cells.empty()) return std::nullopt;
  const auto cell = free_cells[rng.index(free_cells.size())];
  ep.agent_start = grid.center_of(cell[0], cell[1]);
  ep.agent_heading = wrap_angle(static_cast<double>(rng.index(4)) * std::numbers::pi / 2);
  return ep;
}

}  // namespace

Episode generate_episode(Task task, const std::vector<Scene>& scenes, const SoundBank& bank,
                         Split split, Rng& rng, const std::string& episode_id,
                         const GenerationOptions& options) {
  if (scenes.empty()) throw std::invalid_argument("generate_episode: empty scene pool");
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    const Scene& scene = scenes[rng.index(scenes.size())];
    auto ep = try_generate(task, scene, bank, split, rng, episode_id, options);
    if (ep && validate_episode(*ep, scene).pass) return *ep;
  }
  throw GenerationExhausted("no valid episode for " + episode_id + " after " +
                            std::to_string(options.max_retries) + " attempts");
}

json episode_to_json(const Episode& ep) {
  json sources = json::array();
  for (const auto& s : ep.sources) {
    json j = {{"object_id", s.object_id},
              {"category", to_string(s.category)},
              {"clip_id", s.clip_id},
              {"position", vec_to_json(s.position)},
              {"height", s.height},
              {"orientation", s.orientation},
              {"initial_joint", s.initial_joint}};
    if (!s.receptacle_id.empty()) j["receptacle_id"] = s.receptacle_id;
    if (!s.bound_to.empty()) j["bound_to"] = s.bound_to;
    if (s.place_target) j["place_target"] = vec_to_json(*s.place_target);
    sources.push_back(std::move(j));
  }
  json distractors = json::array();
  for (const auto& d : ep.distractors) {
    distractors.push_back({{"object_id", d.object_id},
                           {"position", vec_to_json(d.position)},
                           {"height", d.height},
                           {"receptacle_id", d.receptacle_id}});
  }
  json chains = json::array();
  for (const auto& c : ep.ground_truth) chains.push_back(chain_to_json(c));
  json j = {{"episode_id", ep.episode_id},
            {"task", to_string(ep.task)},
            {"scene_id", ep.scene_id},
            {"split", to_string(ep.split)},
            {"agent_start", vec_to_json(ep.agent_start)},
            {"agent_heading", ep.agent_heading},
            {"sources", sources},
            {"priority_order", ep.priority_order},
            {"distractors", distractors},
            {"ground_truth", chains}};
  if (ep.sink) j["sink"] = sink_to_json(*ep.sink);
  return j;
}

Episode episode_from_json(const json& j) {
  try {
    Episode ep;
    ep.episode_id = j.at("episode_id").get<std::string>();
    ep.task = task_from_string(j.at("task").get<std::string>());
    ep.scene_id = j.at("scene_id").get<std::string>();
    ep.split = split_from_string(j.at("split").get<std::string>());
    ep.agent_start = vec_from_json(j.at("agent_start"));
    ep.agent_heading = j.at("agent_heading").get<double>();
    for (const auto& s : j.at("sources")) {
      EpisodeSource src;
      src.object_id = s.at("object_id").get<std::string>();
      src.category = category_from_string(s.at("category").get<std::string>());
      src.clip_id = s.at("clip_id").get<std::string>();
      src.position = vec_from_json(s.at("position"));
      src.height = s.at("height").get<double>();
      src.orientation = s.at("orientation").get<double>();
      src.initial_joint = s.at("initial_joint").get<double>();
      src.receptacle_id = s.value("receptacle_id", "");
      src.bound_to = s.value("bound_to", "");
      if (s.contains("place_target")) src.place_target = vec_from_json(s.at("place_target"));
      ep.sources.push_back(std::move(src));
    }
    ep.priority_order = j.at("priority_order").get<std::vector<int>>();
    for (const auto& d : j.at("distractors")) {
      ep.distractors.push_back({d.at("object_id").get<std::string>(), vec_from_json(d.at("position")),
                                d.at("height").get<double>(), d.at("receptacle_id").get<std::string>()});
    }
    for (const auto& c : j.at("ground_truth")) {
      SkillChain chain;
      for (const auto& t : c) chain.push_back(skill_from_string(t.get<std::string>()));
      ep.ground_truth.push_back(std::move(chain));
    }
    if (j.contains("sink")) ep.sink = sink_from_json(j.at("sink"));
    return ep;
  } catch (const json::exception& e) {
    throw FormatError(std::string("episode json: ") + e.what());
  } catch (const PlanInvalid& e) {
    throw FormatError(std::string("episode json: ") + e.what());
  } catch (const UnknownCategory& e) {
    throw FormatError(std::string("episode json: ") + e.what());
  }
}

void write_episodes(const std::filesystem::path& path, const std::vector<Episode>& eps) {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot write " + path.string());
  for (const auto& ep : eps) f << episode_to_json(ep).dump() << '\n';
  if (!f) throw IoFailure("write failed: " + path.string());
}

std::vector<Episode> read_episodes(const std::filesystem::path& path,
                                   const std::map<std::string, Scene>& scenes) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open " + path.string());
  std::vector<Episode> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Episode ep = episode_from_json(j);
    const auto it = scenes.find(ep.scene_id);
    if (it == scenes.end()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": unknown scene " + ep.scene_id);
    }
    const auto rep = validate_episode(ep, it->second);
    if (!rep.pass) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": episode " + ep.episode_id +
                        " fails validation (" + std::string(to_string(rep.failures.front().first)) + ")");
    }
    out.push_back(std::move(ep));
  }
  return out;
}

std::string_view to_string(Preset p) { return p == Preset::Paper ? "paper" : "desk"; }

Preset preset_from_string(std::string_view s) {
  if (s == "paper") return Preset::Paper;
  if (s == "desk") return Preset::Desk;
  throw FormatError("unknown preset: " + std::string(s));
}

PresetCounts preset_counts(Preset p, Task t) {
  if (p == Preset::Paper) return {660, t == Task::BiSonic ? 355 : 222};
  return {100, t == Task::BiSonic ? 54 : 34};
}

int preset_scene_count(Preset p) { return p == Preset::Paper ? 40 : 12; }

json DatasetManifest::to_json() const {
  return {{"schema_version", 1},
          {"task", soundtrig::to_string(task)},
          {"preset", soundtrig::to_string(preset)},
          {"seed", seed},
          {"bank_seed", bank_seed},
          {"train_episodes", train_episodes},
          {"test_episodes", test_episodes},
          {"train_file", train_file},
          {"test_file", test_file},
          {"scene_files", scene_files}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  try {
    DatasetManifest m;
    m.task = task_from_string(j.at("task").get<std::string>());
    m.preset = preset_from_string(j.at("preset").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.bank_seed = j.at("bank_seed").get<std::uint64_t>();
    m.train_episodes = j.at("train_episodes").get<int>();
    m.test_episodes = j.at("test_episodes").get<int>();
    m.train_file = j.at("train_file").get<std::string>();
    m.test_file = j.at("test_file").get<std::string>();
    m.scene_files = j.at("scene_files").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest json: ") + e.what());
  }
}

std::map<std::string, Scene> Dataset::scene_map() const {
  std::map<std::string, Scene> m;
  for (const auto& s : scenes) m.emplace(s.id, s);
  return m;
}

DatasetManifest manifest_for(Task task, Preset preset, std::uint64_t seed, std::uint64_t bank_seed) {
  DatasetManifest m;
  m.task = task;
  m.preset = preset;
  m.seed = seed;
  m.bank_seed = bank_seed;
  const auto counts = preset_counts(preset, task);
  m.train_episodes = counts.train;
  m.test_episodes = counts.test;
  m.train_file = "train.jsonl";
  m.test_file = "test.jsonl";
  for (int i = 0; i < preset_scene_count(preset); ++i) {
    char id[48];
    std::snprintf(id, sizeof(id), "scenes/scene_%03d.json", i);
    m.scene_files.emplace_back(id);
  }
  return m;
}

Dataset generate_dataset(Task task, Preset preset, std::uint64_t seed, const SoundBank& bank, int jobs) {
  Dataset ds;
  ds.manifest = manifest_for(task, preset, seed, bank.seed);
  ds.scenes = generate_scene_pool(derive_seed(seed, "scene-pool"), preset_scene_count(preset));
  for (Split split : {Split::Train, Split::Test}) {
    const int count = split == Split::Train ? ds.manifest.train_episodes : ds.manifest.test_episodes;
    std::vector<Episode> eps(count);
    std::atomic<int> next{0};
    const std::string label = std::string(to_string(task)) + "/" + std::string(to_string(split));
    auto worker = [&] {
      for (int i = next++; i < count; i = next++) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s_%s_%05d", std::string(to_string(task)).c_str(),
                      std::string(to_string(split)).c_str(), i);
        Rng rng(derive_seed(seed, label, static_cast<std::uint64_t>(i)));
        eps[i] = generate_episode(task, ds.scenes, bank, split, rng, id);
      }
    };
    const int n = std::max(1, std::min(jobs, count));
    if (n == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(n);
      for (int t = 0; t < n; ++t) {
        pool.emplace_back([&, t] {
          try {
            worker();
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    (split == Split::Train ? ds.train : ds.test) = std::move(eps);
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "scenes", ec);
  if (ec) throw IoFailure("cannot create " + dir.string());
  for (std::size_t i = 0; i < ds.scenes.size(); ++i) {
    save_scene(ds.scenes[i], dir / ds.manifest.scene_files.at(i));
  }
  write_episodes(dir / ds.manifest.train_file, ds.train);
  write_episodes(dir / ds.manifest.test_file, ds.test);
  std::ofstream f(dir / "manifest.json");
  if (!f) throw IoFailure("cannot write manifest");
  f << ds.manifest.to_json().dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path) {
  const auto manifest_path = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const auto dir = manifest_path.parent_path();
  std::ifstream f(manifest_path);
  if (!f) throw IoFailure("cannot open " + manifest_path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest json: ") + e.what());
  }
  Dataset ds;
  ds.manifest = DatasetManifest::from_json(j);
  for (const auto& sf : ds.manifest.scene_files) ds.scenes.push_back(load_scene(dir / sf));
  const auto scenes = ds.scene_map();
  ds.train = read_episodes(dir / ds.manifest.train_file, scenes);
  ds.test = read_episodes(dir / ds.manifest.test_file, scenes);
  if (static_cast<int>(ds.train.size()) != ds.manifest.train_episodes ||
      static_cast<int>(ds.test.size()) != ds.manifest.test_episodes) {
    throw FormatError("episode files do not match manifest counts");
  }
  return ds;
}

}  // namespace soundtrig
