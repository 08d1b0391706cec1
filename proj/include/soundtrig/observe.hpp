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

#include <vector>

#include "soundtrig/acoustics.hpp"
#include "soundtrig/episodes.hpp"
#include "soundtrig/planner.hpp"
#include "soundtrig/soundbank.hpp"

namespace soundtrig {

/// Sources for every emitting object in the world at step t. Objects without
/// a clip are skipped.
std::vector<ActiveSource> world_sources(const World& world, const SoundBank& bank, long t_step,
                                        double step_seconds = kDefaultStepSeconds);

/// What the agent hears at step t from its current pose.
BinauralFrame render_world(const World& world, const SoundBank& bank, long t_step,
                           const RenderOptions& options = {}, double step_seconds = kDefaultStepSeconds);

RangeScan head_scan(const World& world);

/// First-step observation handed to the planner. For BiSonic the hint names
/// the main source's category.
PlannerObservation planner_observation(const World& world, const Episode& ep, const SoundBank& bank,
                                       const RenderOptions& options = {});

/// Builds the episode world from its base scene.
World make_episode_world(const Episode& ep, const Scene& base_scene);

}  // namespace soundtrig
