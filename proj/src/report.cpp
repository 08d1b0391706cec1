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


#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "soundtrig/errors.hpp"
#include "soundtrig/harness.hpp"

namespace soundtrig {

double RateCell::rate() const {
  if (attempts == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * successes / attempts;
}

const RateCell& EvalReport::cell(int stage, int column) const {
  const StageStats& s = stages.at(stage);
  if (column == 0) return s.planning;
  if (column == 6) return s.overall;
  return s.skills.at(column - 1);
}

EvalReport aggregate(const std::vector<EpisodeRecord>& records, Task task, const std::string& planner,
                     const std::string& controllers) {
  EvalReport r;
  r.task = task;
  r.planner = planner;
  r.controllers = controllers;
  const int n_stages = task == Task::BiSonic ? 2 : 1;
  r.stages.resize(n_stages);
  for (const auto& rec : records) {
    if (rec.skipped) {
      ++r.skipped;
      continue;
    }
    ++r.episodes;
    bool prefix_ok = true;
    for (int k = 0; k < n_stages; ++k) {
      StageStats& st = r.stages[k];
      const bool plan_ok = k < static_cast<int>(rec.planning_correct.size()) && rec.planning_correct[k];
      ++st.planning.attempts;
      if (plan_ok) ++st.planning.successes;
      bool chain_ok = k < static_cast<int>(rec.stages.size());
      if (chain_ok) {
        for (const auto& o : rec.stages[k]) {
          RateCell& c = st.skills[static_cast<int>(o.skill)];
          ++c.attempts;
          if (o.success) ++c.successes;
          chain_ok = chain_ok && o.success;
        }
        chain_ok = chain_ok && !rec.stages[k].empty();
      }
      prefix_ok = prefix_ok && plan_ok && chain_ok;
      ++st.overall.attempts;
      if (prefix_ok) ++st.overall.successes;
    }
  }
  if (r.episodes == 0) throw EmptyRun("no non-skipped episodes to aggregate");
  return r;
}

namespace {

std::string fmt_rate(const RateCell& c) {
  if (c.attempts == 0) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", c.rate());
  return buf;
}

}  // namespace

std::string format_cell(const EvalReport& r, int column) {
  std::string s = fmt_rate(r.cell(0, column));
  for (std::size_t k = 1; k < r.stages.size(); ++k) s += " / " + fmt_rate(r.cell(static_cast<int>(k), column));
  return s;
}

std::string format_report_table(const EvalReport& r) {
  std::vector<std::string> head = {"Method"};
  std::vector<std::string> row = {r.planner + "+" + r.controllers};
  for (int c = 0; c < static_cast<int>(kReportColumns.size()); ++c) {
    head.emplace_back(kReportColumns[c]);
    row.push_back(format_cell(r, c));
  }
  std::ostringstream out;
  out << "task: " << to_string(r.task) << "  episodes: " << r.episodes << "  skipped: " << r.skipped << '\n';
  std::vector<std::size_t> width(head.size());
  for (std::size_t k = 0; k < head.size(); ++k) width[k] = std::max(head[k].size(), row[k].size());
  auto line = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (std::size_t k = 0; k < cells.size(); ++k) {
      out << ' ' << cells[k] << std::string(width[k] - cells[k].size(), ' ') << " |";
    }
    out << '\n';
  };
  line(head);
  out << '|';
  for (std::size_t w : width) out << std::string(w + 2, '-') << '|';
  out << '\n';
  line(row);
  return out.str();
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "task,planner,controllers,episodes,skipped,stage,column,successes,attempts,rate\n";
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    for (int c = 0; c < static_cast<int>(kReportColumns.size()); ++c) {
      const RateCell& cell = r.cell(static_cast<int>(k), c);
      out << to_string(r.task) << ',' << r.planner << ',' << r.controllers << ',' << r.episodes << ','
          << r.skipped << ',' << k + 1 << ',' << kReportColumns[c] << ',' << cell.successes << ','
          << cell.attempts << ',' << fmt_rate(cell) << '\n';
    }
  }
  return out.str();
}

EvalReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("task,", 0) != 0) throw FormatError("report CSV header missing");
  EvalReport r;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() != 10) throw FormatError("report CSV row has " + std::to_string(f.size()) + " fields");
    try {
      if (first) {
        r.task = task_from_string(f[0]);
        r.planner = f[1];
        r.controllers = f[2];
        r.episodes = std::stoi(f[3]);
        r.skipped = std::stoi(f[4]);
        first = false;
      }
      const int stage = std::stoi(f[5]) - 1;
      if (stage < 0 || stage > 1) throw FormatError("bad stage in report CSV");
      if (static_cast<int>(r.stages.size()) <= stage) r.stages.resize(stage + 1);
      int col = -1;
      for (int c = 0; c < static_cast<int>(kReportColumns.size()); ++c) {
        if (f[6] == kReportColumns[c]) col = c;
      }
      if (col < 0) throw FormatError("unknown report column " + f[6]);
      StageStats& s = r.stages[stage];
      RateCell& cell = col == 0 ? s.planning : col == 6 ? s.overall : s.skills[col - 1];
      cell.successes = std::stoi(f[7]);
      cell.attempts = std::stoi(f[8]);
    } catch (const std::invalid_argument&) {
      throw FormatError("non-numeric field in report CSV");
    } catch (const std::out_of_range&) {
      throw FormatError("numeric field out of range in report CSV");
    }
  }
  if (first) throw FormatError("report CSV has no rows");
  return r;
}

void write_report(const EvalReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : {std::pair{std::string("report.csv"), report_csv(r)},
                                   std::pair{std::string("report.txt"), format_report_table(r)}}) {
    std::ofstream f(dir / name);
    if (!f) throw IoFailure("cannot write " + (dir / name).string());
    f << body;
    if (!f) throw IoFailure("write failed: " + (dir / name).string());
  }
}

EvalReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_report_csv(ss.str());
}

void write_records(const std::vector<EpisodeRecord>& records, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoFailure("cannot write " + path.string());
  for (const auto& r : records) f << r.to_json().dump() << '\n';
  if (!f) throw IoFailure("write failed: " + path.string());
}

std::vector<EpisodeRecord> read_records(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot read " + path.string());
  std::vector<EpisodeRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(EpisodeRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad record line: ") + e.what());
    }
  }
  return out;
}

}  // namespace soundtrig
