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


#include <cstdio>
#include <sstream>

#include "soundtrig/harness.hpp"

namespace soundtrig {

TraceArtifact make_trace(const Episode& ep, const TraceLog& log, const EpisodeRecord& record) {
  TraceArtifact t;
  t.episode_id = ep.episode_id;
  t.trajectory.push_back(ep.agent_start);
  for (const auto& line : log.lines()) {
    if (line.contains("event")) {
      const std::string ev = line["event"].get<std::string>();
      if (ev == "skill_start") {
        t.boundaries.push_back({t.trajectory.size() - 1, line["detail"]["skill"].get<std::string>(), false});
      } else if (ev == "skill_end" && !t.boundaries.empty()) {
        t.boundaries.back().success = line["detail"]["success"].get<bool>();
      }
      continue;
    }
    const auto& b = line.at("base");
    t.trajectory.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    ++t.step_count;
  }
  for (const auto& s : ep.sources) t.sources.emplace_back(s.position, std::string(to_string(s.category)));
  if (record.skipped) {
    t.annotations.push_back("skipped: " + record.skip_reason);
  } else if (record.plan_error) {
    t.annotations.push_back("plan rejected: " + *record.plan_error);
  } else {
    for (std::size_t k = 0; k < record.stages.size(); ++k) {
      std::string a = "stage " + std::to_string(k + 1) + ":";
      for (const auto& o : record.stages[k]) {
        a += std::string(" ") + std::string(to_string(o.skill)) + (o.success ? "=ok" : "=fail");
        if (o.failure) a += "(" + std::string(to_string(*o.failure)) + ")";
      }
      t.annotations.push_back(a);
    }
  }
  t.annotations.push_back(std::string("overall: ") + (record.overall ? "success" : "failure"));
  return t;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

}  // namespace

std::string render_trace_svg(const TraceArtifact& trace, const Scene& scene) {
  const double scale = 80.0;  // px per metre
  const double pad = 20.0;
  const double w = scene.bounds.width() * scale + 2 * pad;
  const double map_h = scene.bounds.height() * scale + 2 * pad;
  const double h = map_h + 18.0 * (trace.annotations.size() + 1);
  // y grows upward in the world, downward in SVG.
  auto X = [&](double x) { return num(pad + (x - scene.bounds.min.x) * scale); };
  auto Y = [&](double y) { return num(pad + (scene.bounds.max.y - y) * scale); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h) << "\">\n";
  o << "<title>" << escape(trace.episode_id) << "</title>\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"white\"/>\n";
  for (const auto& r : scene.receptacles) {
    o << "<rect x=\"" << X(r.top.min.x) << "\" y=\"" << Y(r.top.max.y) << "\" width=\"" << num(r.top.width() * scale)
      << "\" height=\"" << num(r.top.height() * scale) << "\" fill=\"#d8c8a8\" stroke=\"#8a7650\"/>\n";
  }
  for (const auto& s : scene.sinks) {
    o << "<rect x=\"" << X(s.footprint.min.x) << "\" y=\"" << Y(s.footprint.max.y) << "\" width=\""
      << num(s.footprint.width() * scale) << "\" height=\"" << num(s.footprint.height() * scale)
      << "\" fill=\"#a8c8e8\" stroke=\"#4a78a8\"/>\n";
  }
  for (const auto& wl : scene.walls) {
    o << "<line x1=\"" << X(wl.a.x) << "\" y1=\"" << Y(wl.a.y) << "\" x2=\"" << X(wl.b.x) << "\" y2=\"" << Y(wl.b.y)
      << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
  }
  for (const auto& d : scene.doors) {
    o << "<line x1=\"" << X(d.hinge.x) << "\" y1=\"" << Y(d.hinge.y) << "\" x2=\"" << X(d.leaf_end.x) << "\" y2=\""
      << Y(d.leaf_end.y) << "\" stroke=\"#8b4513\" stroke-width=\"3\"/>\n";
  }
  if (!trace.trajectory.empty()) {
    o << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& p : trace.trajectory) o << X(p.x) << ',' << Y(p.y) << ' ';
    o << "\"/>\n";
    const Vec2 s = trace.trajectory.front();
    o << "<circle cx=\"" << X(s.x) << "\" cy=\"" << Y(s.y) << "\" r=\"5\" fill=\"#1f77b4\"/>\n";
  }
  for (const auto& b : trace.boundaries) {
    const Vec2 p = trace.trajectory.at(b.index);
    o << "<rect x=\"" << num(std::stod(X(p.x)) - 4) << "\" y=\"" << num(std::stod(Y(p.y)) - 4)
      << "\" width=\"8\" height=\"8\" fill=\"" << (b.success ? "#2ca02c" : "#d62728") << "\"><title>"
      << escape(b.skill) << "</title></rect>\n";
  }
  for (const auto& [p, label] : trace.sources) {
    o << "<circle cx=\"" << X(p.x) << "\" cy=\"" << Y(p.y) << "\" r=\"7\" fill=\"none\" stroke=\"#ff7f0e\" "
      << "stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(std::stod(X(p.x)) + 9) << "\" y=\"" << Y(p.y) << "\" font-size=\"11\">"
      << escape(label) << "</text>\n";
  }
  double ty = map_h + 14.0;
  o << "<text x=\"" << num(pad) << "\" y=\"" << num(ty) << "\" font-size=\"12\">" << escape(trace.episode_id)
    << " (" << trace.step_count << " steps)</text>\n";
  for (const auto& a : trace.annotations) {
    ty += 18.0;
    o << "<text x=\"" << num(pad) << "\" y=\"" << num(ty) << "\" font-size=\"12\">" << escape(a) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace soundtrig
