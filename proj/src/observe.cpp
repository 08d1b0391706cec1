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


#include "soundtrig/observe.hpp"

namespace soundtrig {

std::vector<ActiveSource> world_sources(const World& world, const SoundBank& bank, long t_step,
                                        double step_seconds) {
  std::vector<ActiveSource> out;
  for (const auto& obj : world.objects()) {
    if (!obj.emitting || !obj.sound_clip_id) continue;
    const SoundClip& clip = bank.at(*obj.sound_clip_id);
    ActiveSource s;
    s.position = emission_point(obj, world.scene());
    s.window = window_of(clip, t_step, step_seconds);
    s.band = dominant_band(s.window);
    out.push_back(std::move(s));
  }
  return out;
}

BinauralFrame render_world(const World& world, const SoundBank& bank, long t_step, const RenderOptions& options,
                           double step_seconds) {
  const auto sources = world_sources(world, bank, t_step, step_seconds);
  RenderOptions opts = options;
  opts.silent_length = static_cast<std::size_t>(std::llround(step_seconds * kSampleRate));
  return render_binaural(world.scene(), sources, world.agent(), EarGeometry{}, opts);
}

RangeScan head_scan(const World& world) {
  return range_scan(world.grid(), world.agent().base, world.agent().heading);
}

PlannerObservation planner_observation(const World& world, const Episode& ep, const SoundBank& bank,
                                       const RenderOptions& options) {
  PlannerObservation obs;
  obs.audio = render_world(world, bank, 0, options);
  obs.scan = head_scan(world);
  if (ep.task == Task::BiSonic) obs.known_first_source = ep.source_in_order(0).category;
  return obs;
}

World make_episode_world(const Episode& ep, const Scene& base_scene) {
  Scene scene = episode_scene(base_scene, ep);
  auto objects = episode_objects(ep, scene);
  return World(std::move(scene), std::move(objects), episode_agent(ep));
}

}  // namespace soundtrig
