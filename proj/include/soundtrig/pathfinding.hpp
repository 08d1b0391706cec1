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

#include <optional>
#include <vector>

#include "soundtrig/world.hpp"

namespace soundtrig {

/// A* over the agent's motion lattice: nodes are the positions reachable from
/// `start` by axis-aligned moves of kMoveStep, edges are moves whose swept
/// segment stays in free cells (the same test MoveForward uses). Returns the
/// waypoint sequence (start first) ending at the first node within `radius` of
/// `target`, preferring the shortest path and then the node nearest the target.
std::optional<std::vector<Vec2>> plan_lattice_path(const OccupancyGrid& grid, Vec2 start,
                                                   Vec2 target, double radius);

/// Convert a waypoint path into discrete navigation actions starting from
/// `heading`, ending with Stop.
std::vector<NavAction> path_to_actions(const std::vector<Vec2>& path, double heading);

}  // namespace soundtrig
