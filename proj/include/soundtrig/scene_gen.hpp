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
#include <vector>

#include "soundtrig/world.hpp"

namespace soundtrig {

/// Material table shared by generated scenes.
std::map<std::string, MaterialProperties> default_materials();

/// One rectangular apartment room: perimeter walls, two exterior doors, an
/// optional partition wall with an opening, and several receptacles. All
/// geometry sits on a 0.25 m lattice.
Scene generate_scene(std::uint64_t seed, const std::string& id);

std::vector<Scene> generate_scene_pool(std::uint64_t seed, int count);

/// Empty shoebox room with perimeter walls of a single material.
Scene make_empty_room(const std::string& id, double width, double height,
                      const std::string& material = "plaster");

}  // namespace soundtrig
