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


#include "soundtrig/nav_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "soundtrig/observe.hpp"
#include "soundtrig/scene_gen.hpp"

namespace soundtrig {

using nlohmann::json;

json NavEnvConfig::to_json() const {
  return json{{"room_size", room_size},
              {"horizon", horizon},
              {"window_seconds", window_seconds},
              {"clip_id", clip_id},
              {"min_start_distance", min_start_distance},
              {"success_reward", success_reward},
              {"step_penalty", step_penalty},
              {"shaping", shaping},
              {"near_log_level", near_log_level},
              {"terminal_miss_stop", terminal_miss_stop},
              {"rir_max_order", rir.max_order},
              {"rir_max_length", rir.max_length}};
}

NavEnvConfig NavEnvConfig::from_json(const json& j) {
  NavEnvConfig c;
  c.room_size = j.value("room_size", c.room_size);
  c.horizon = j.value("horizon", c.horizon);
  c.window_seconds = j.value("window_seconds", c.window_seconds);
  c.clip_id = j.value("clip_id", c.clip_id);
  c.min_start_distance = j.value("min_start_distance", c.min_start_distance);
  c.success_reward = j.value("success_reward", c.success_reward);
  c.step_penalty = j.value("step_penalty", c.step_penalty);
  c.shaping = j.value("shaping", c.shaping);
  c.near_log_level = j.value("near_log_level", c.near_log_level);
  c.terminal_miss_stop = j.value("terminal_miss_stop", c.terminal_miss_stop);
  c.rir.max_order = j.value("rir_max_order", c.rir.max_order);
  c.rir.max_length = j.value("rir_max_length", c.rir.max_length);
  return c;
}

void NavFeatures::reset() {
  has_prev_ = false;
  prev_log_level_ = 0.0;
  last_action_ = -1;
  quarter_ = 0;
  itd_memory_.fill(0.0);
  itd_age_.fill(-1);
}

void NavFeatures::set_last_action(NavAction a) {
  last_action_ = static_cast<int>(a);
  if (a == NavAction::TurnLeft) quarter_ = (quarter_ + 1) % 4;
  if (a == NavAction::TurnRight) quarter_ = (quarter_ + 3) % 4;
}

std::vector<double> NavFeatures::build(const BinauralFrame& frame, const RangeScan& scan) {
  const AudioFeatures f = direction_features(frame);
  std::vector<double> x;
  x.reserve(kNavObsDim);
  const double itd = f.itd_valid ? f.itd_samples / static_cast<double>(max_itd_lag()) : 0.0;
  x.push_back(itd);
  x.push_back(std::clamp(f.ild_db / 10.0, -3.0, 3.0));
  // log10 level spans about [-1.7, 0] across the room for the default clip.
  const double log_level = std::log10(f.level + 1e-12);
  x.push_back(std::clamp(2.0 * (log_level + 0.9), -3.0, 3.0));
  x.push_back(std::tanh(20.0 * (log_level - near_log_level_)));
  x.push_back(has_prev_ ? std::clamp(5.0 * (log_level - prev_log_level_), -3.0, 3.0) : 0.0);
  prev_log_level_ = log_level;
  has_prev_ = true;
  double total = 0.0;
  for (double e : f.band_energies) total += e;
  for (double e : f.band_energies) x.push_back(total > 0.0 ? e / total : 0.0);
  const std::size_t per = std::max<std::size_t>(1, scan.ranges.size() / kScanSectors);
  for (int s = 0; s < kScanSectors; ++s) {
    double m = scan.max_range;
    for (std::size_t k = s * per; k < std::min(scan.ranges.size(), (s + 1) * per); ++k) m = std::min(m, scan.ranges[k]);
    x.push_back(m / scan.max_range);
  }
  for (int a = 0; a < kNavActionCount; ++a) x.push_back(a == last_action_ ? 1.0 : 0.0);

  for (auto& age : itd_age_) {
    if (age >= 0) ++age;
  }
  itd_memory_[quarter_] = itd;
  itd_age_[quarter_] = 0;
  // A quarter turn to the left saw the source at bearing - 90 degrees, so its
  // ITD reads -cos(bearing); the right quarter reads +cos(bearing).
  const int left = (quarter_ + 1) % 4, right = (quarter_ + 3) % 4;
  const double wl = itd_age_[left] >= 0 ? std::exp(-itd_age_[left] / 4.0) : 0.0;
  const double wr = itd_age_[right] >= 0 ? std::exp(-itd_age_[right] / 4.0) : 0.0;
  const double conf = std::min(1.0, wl + wr);
  const double front = wl + wr > 0.0 ? (wr * itd_memory_[right] - wl * itd_memory_[left]) / (wl + wr) : 0.0;
  x.push_back(front * conf);
  x.push_back(conf);
  return x;
}

AudioGoalEnv::AudioGoalEnv(SoundClip clip, NavEnvConfig config, std::uint64_t seed)
    : clip_(std::move(clip)), cfg_(std::move(config)), rng_(seed),
      scene_(make_empty_room("audio_goal", cfg_.room_size, cfg_.room_size)),
      grid_(build_occupancy_grid(scene_)), features_(cfg_.near_log_level) {}

std::vector<double> AudioGoalEnv::observe() {
  const long w = t_offset_ + t_;
  auto it = windows_.find(w);
  if (it == windows_.end()) {
    Waveform win = window_of(clip_, w, cfg_.window_seconds);
    const int band = dominant_band(win);
    it = windows_.emplace(w, std::pair{std::move(win), band}).first;
  }
  std::vector<ActiveSource> src(1);
  src[0].position = source_;
  src[0].window = it->second.first;
  src[0].band = it->second.second;
  RenderOptions opts;
  opts.rir = cfg_.rir;
  const BinauralFrame frame = render_binaural(scene_, src, agent_, EarGeometry{}, opts);
  return features_.build(frame, range_scan(grid_, agent_.base, agent_.heading));
}

std::vector<double> AudioGoalEnv::reset() {
  std::vector<std::array<int, 2>> free;
  for (int j = 0; j < grid_.rows(); ++j) {
    for (int i = 0; i < grid_.cols(); ++i) {
      if (grid_.free(i, j)) free.push_back({i, j});
    }
  }
  const double margin = 0.5;
  for (;;) {
    const auto cell = free[rng_.index(free.size())];
    agent_ = AgentState{};
    agent_.base = grid_.center_of(cell[0], cell[1]);
    agent_.heading = static_cast<double>(rng_.index(4)) * std::numbers::pi / 2 - std::numbers::pi / 2;
    source_ = {rng_.uniform(scene_.bounds.min.x + margin, scene_.bounds.max.x - margin),
               rng_.uniform(scene_.bounds.min.y + margin, scene_.bounds.max.y - margin)};
    if (distance(agent_.base, source_) >= cfg_.min_start_distance) break;
  }
  t_offset_ = static_cast<long>(rng_.index(64));
  t_ = 0;
  steps_ = 0;
  features_.reset();
  return observe();
}

EnvStep AudioGoalEnv::step(int action) {
  EnvStep s;
  const auto a = static_cast<NavAction>(action);
  const double before = distance(agent_.base, source_);
  ++steps_;
  s.reward = -cfg_.step_penalty;
  const bool in_reach = before <= kReachRadius + kThresholdEps;
  if (a == NavAction::Stop && (in_reach || cfg_.terminal_miss_stop)) {
    s.done = true;
    s.success = in_reach;
    if (s.success) s.reward += cfg_.success_reward;
    return s;
  }
  if (a != NavAction::Stop) agent_ = step_agent(agent_, a, grid_).state;
  ++t_;
  s.reward += cfg_.shaping * (before - distance(agent_.base, source_));
  features_.set_last_action(a);
  s.obs = observe();
  if (steps_ >= cfg_.horizon) s.done = true;
  return s;
}

EnvFactory audio_goal_factory(const SoundBank& bank, const NavEnvConfig& config) {
  SoundClip clip = bank.at(config.clip_id);
  return [clip, config](std::uint64_t seed) -> std::unique_ptr<Env> {
    return std::make_unique<AudioGoalEnv>(clip, config, seed);
  };
}

TrainResult train_navigate(const SoundBank& bank, const NavEnvConfig& env_config, const PpoConfig& ppo,
                           std::uint64_t seed) {
  return train_policy(audio_goal_factory(bank, env_config), ppo, seed);
}

TrainedNavController::TrainedNavController(PolicyNet net, const SoundBank& bank, NavEnvConfig config)
    : net_(std::move(net)), bank_(&bank), cfg_(std::move(config)), features_(cfg_.near_log_level) {}

void TrainedNavController::reset(const SkillContext&) {
  features_.reset();
  t_ = 0;
}

NavAction TrainedNavController::act(const SkillContext& ctx) {
  const World& w = *ctx.world;
  RenderOptions opts;
  opts.rir = cfg_.rir;
  const BinauralFrame frame = render_world(w, *bank_, t_++, opts, cfg_.window_seconds);
  const auto x = features_.build(frame, head_scan(w));
  const auto a = static_cast<NavAction>(greedy_action(net_, x));
  features_.set_last_action(a);
  return a;
}

}  // namespace soundtrig
