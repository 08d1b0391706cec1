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

#include "soundtrig/pathfinding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace soundtrig {

namespace {

struct Node {
  int a;
  int b;
  auto operator<=>(const Node&) const = default;
};

struct Entry {
  double f;
  double tie;  // distance to target, prefers nodes near the goal
  int g;
  Node node;
  bool operator>(const Entry& o) const {
    if (f != o.f) return f > o.f;
    if (tie != o.tie) return tie > o.tie;
    return o.node < node;
  }
};

}  // namespace

std::optional<std::vector<Vec2>> plan_lattice_path(const OccupancyGrid& grid, Vec2 start,
                                                   Vec2 target, double radius) {
  auto position = [&](Node n) { return start + Vec2{n.a * kMoveStep, n.b * kMoveStep}; };
  auto heuristic = [&](Node n) {
    return std::max(0.0, distance(position(n), target) - radius) / kMoveStep;
  };
  if (!grid.point_free(start)) return std::nullopt;

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::map<Node, int> best_g;
  std::map<Node, Node> parent;
  const Node origin{0, 0};
  open.push({heuristic(origin), distance(start, target), 0, origin});
  best_g[origin] = 0;
  constexpr std::array<std::array<int, 2>, 4> kMoves = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

  while (!open.empty()) {
    const Entry cur = open.top();
    open.pop();
    if (best_g[cur.node] < cur.g) continue;
    const Vec2 p = position(cur.node);
    if (distance(p, target) <= radius) {
      std::vector<Vec2> path{p};
      Node n = cur.node;
      while (!(n == origin)) {
        n = parent.at(n);
        path.push_back(position(n));
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const auto& m : kMoves) {
      const Node next{cur.node.a + m[0], cur.node.b + m[1]};
      const Vec2 q = position(next);
      if (!segment_free(grid, p, q)) continue;
      const int g = cur.g + 1;
      auto it = best_g.find(next);
      if (it != best_g.end() && it->second <= g) continue;
      best_g[next] = g;
      parent[next] = cur.node;
      open.push({g + heuristic(next), distance(q, target), g, next});
    }
  }
  return std::nullopt;
}

std::vector<NavAction> path_to_actions(const std::vector<Vec2>& path, double heading) {
  std::vector<NavAction> actions;
  const double quarter = std::numbers::pi / 2;
  // Heading index on the quarter-turn lattice: 0 = +x, 1 = +y, 2 = -x, 3 = -y.
  int facing = ((static_cast<int>(std::lround(heading / quarter)) % 4) + 4) % 4;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Vec2 d = path[k] - path[k - 1];
    int want;
    if (std::abs(d.x) > std::abs(d.y)) {
      want = d.x > 0 ? 0 : 2;
    } else {
      want = d.y > 0 ? 1 : 3;
    }
    const int diff = ((want - facing) % 4 + 4) % 4;
    if (diff == 1) {
      actions.push_back(NavAction::TurnLeft);
    } else if (diff == 3) {
      actions.push_back(NavAction::TurnRight);
    } else if (diff == 2) {
      actions.push_back(NavAction::TurnLeft);
      actions.push_back(NavAction::TurnLeft);
    }
    facing = want;
    actions.push_back(NavAction::MoveForward);
  }
  actions.push_back(NavAction::Stop);
  return actions;
}

}  // namespace soundtrig
