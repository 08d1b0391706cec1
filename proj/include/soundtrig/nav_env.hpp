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
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "soundtrig/acoustics.hpp"
#include "soundtrig/learning.hpp"
#include "soundtrig/perception.hpp"
#include "soundtrig/skills.hpp"
#include "soundtrig/soundbank.hpp"

namespace soundtrig {

// Observation layout: ITD, ILD, log level, a saturated near-source level cue,
// level change since the previous step, 4 band energy shares, 8 range
// sectors, previous action one-hot, then a front/back estimate from ITDs heard
// a quarter turn away (by odometry) and its confidence.
inline constexpr int kScanSectors = 8;
inline constexpr int kNavObsDim = 5 + kBandCount + kScanSectors + kNavActionCount + 2;

struct NavEnvConfig {
  double room_size = 6.0;
  int horizon = 100;
  double window_seconds = 1.0;
  std::string clip_id = "sink_train_00";
  double min_start_distance = 1.0;
  double success_reward = 10.0;
  double step_penalty = 0.01;
  double shaping = 1.0;
  // log10 level at which the near cue crosses zero; calibrated for the
  // default clip at the reach radius.
  double near_log_level = -0.42;
  // When false, Stop outside the reach radius only costs the step.
  bool terminal_miss_stop = false;
  RirOptions rir{};

  nlohmann::json to_json() const;
  static NavEnvConfig from_json(const nlohmann::json& j);
};

/// Stateful feature builder shared by the training env and the controller.
class NavFeatures {
 public:
  explicit NavFeatures(double near_log_level = -0.42) : near_log_level_(near_log_level) {}
  void reset();
  std::vector<double> build(const BinauralFrame& frame, const RangeScan& scan);
  void set_last_action(NavAction a);

 private:
  double near_log_level_;
  double prev_log_level_ = 0.0;
  bool has_prev_ = false;
  int last_action_ = -1;
  int quarter_ = 0;  // heading relative to the start, in quarter turns
  std::array<double, 4> itd_memory_{};
  std::array<int, 4> itd_age_{-1, -1, -1, -1};  // steps since heard; -1 when never
};

/// Empty square room, one looping source at a random point, agent at a random
/// free cell. Actions index NavAction (MoveForward, TurnLeft, TurnRight, Stop).
class AudioGoalEnv : public Env {
 public:
  AudioGoalEnv(SoundClip clip, NavEnvConfig config, std::uint64_t seed);

  int obs_dim() const override { return kNavObsDim; }
  std::vector<double> reset() override;
  EnvStep step(int action) override;

  Vec2 source() const { return source_; }
  const AgentState& agent() const { return agent_; }

 private:
  std::vector<double> observe();

  SoundClip clip_;
  NavEnvConfig cfg_;
  Rng rng_;
  Scene scene_;
  OccupancyGrid grid_;
  Vec2 source_;
  AgentState agent_;
  NavFeatures features_;
  std::map<long, std::pair<Waveform, int>> windows_;  // window index -> (samples, band)
  long t_ = 0;
  long t_offset_ = 0;
  int steps_ = 0;
};

EnvFactory audio_goal_factory(const SoundBank& bank, const NavEnvConfig& config);

TrainResult train_navigate(const SoundBank& bank, const NavEnvConfig& env_config, const PpoConfig& ppo,
                           std::uint64_t seed);

/// Navigate controller driven by a trained policy, acting greedily on the
/// world's rendered audio and range scan.
class TrainedNavController : public NavController {
 public:
  TrainedNavController(PolicyNet net, const SoundBank& bank, NavEnvConfig config);
  void reset(const SkillContext& ctx) override;
  NavAction act(const SkillContext& ctx) override;

 private:
  PolicyNet net_;
  const SoundBank* bank_;
  NavEnvConfig cfg_;
  NavFeatures features_;
  long t_ = 0;
};

}  // namespace soundtrig
