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


#include "soundtrig/planner.hpp"

#include <cctype>

#include "soundtrig/errors.hpp"
#include "soundtrig/prompts.hpp"

namespace soundtrig {

using nlohmann::json;

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Oracle: return "oracle";
    case Backend::RuleBased: return "rule";
    case Backend::Remote: return "remote";
  }
  return "?";
}

Backend backend_from_string(std::string_view s) {
  if (s == "oracle") return Backend::Oracle;
  if (s == "rule") return Backend::RuleBased;
  if (s == "remote") return Backend::Remote;
  throw FormatError("unknown planner backend: " + std::string(s));
}

PlannerVerdict plan_oracle(const Episode& ep) {
  PlannerVerdict v;
  v.chain = ep.ground_truth_plan();
  v.backend = Backend::Oracle;
  v.planning_correct = true;
  return v;
}

PlannerVerdict plan_rule_based(const PlannerObservation& obs, const CategoryClassifier& classifier) {
  PlannerVerdict v;
  v.backend = Backend::RuleBased;
  const SkillChain fallback = ground_truth_chain(Category::Phone);
  if (!obs.bisonic()) {
    const Classification c = classifier.classify(obs.audio);
    if (c.silent) {
      v.chain = fallback;
      v.fallback = true;
      v.confidence = 0.0;
    } else {
      v.chain = ground_truth_chain(c.category);
      v.confidence = c.confidence;
    }
  } else {
    const Category first = *obs.known_first_source;
    const Classification c = classifier.classify(obs.audio, first);
    BiSonicChain b;
    b.first_sound = ground_truth_chain(first);
    if (c.silent) {
      b.second_sound = fallback;
      v.fallback = true;
      v.confidence = 0.0;
    } else {
      b.second_sound = ground_truth_chain(c.category);
      v.confidence = c.confidence;
    }
    v.chain = b;
  }
  // Emission goes through the same gate as every other backend.
  v.chain = validate_chain(plan_to_json(v.chain), obs.bisonic());
  return v;
}

namespace {

SkillChain validate_list(const json& raw) {
  if (!raw.is_array()) throw PlanInvalid(raw.dump());
  if (raw.empty()) throw PlanInvalid("empty");
  SkillChain chain;
  for (const auto& t : raw) {
    if (!t.is_string()) throw PlanInvalid(t.dump());
    chain.push_back(skill_from_string(t.get<std::string>()));
  }
  return chain;
}

}  // namespace

Plan validate_chain(const json& raw) {
  if (raw.is_array()) return validate_list(raw);
  if (!raw.is_object()) throw PlanInvalid(raw.dump());
  for (const auto& [key, value] : raw.items()) {
    if (key != "first_sound" && key != "second_sound") throw PlanInvalid(key);
  }
  for (const char* key : {"first_sound", "second_sound"}) {
    if (!raw.contains(key)) throw PlanInvalid(key);
  }
  return BiSonicChain{validate_list(raw.at("first_sound")), validate_list(raw.at("second_sound"))};
}

Plan validate_chain(const json& raw, bool expect_bisonic) {
  Plan p = validate_chain(raw);
  if (expect_bisonic != std::holds_alternative<BiSonicChain>(p)) {
    throw PlanInvalid(expect_bisonic ? "expected first_sound/second_sound map" : "expected skill list");
  }
  return p;
}

std::string strip_markdown_fences(const std::string& text) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  std::string t = trim(text);
  const auto open = t.find("```");
  if (open == std::string::npos) return t;
  // Skip the fence and an optional language tag on the same line.
  auto body = t.find('\n', open);
  if (body == std::string::npos) return t;
  const auto close = t.find("```", body);
  std::string inner = t.substr(body + 1, close == std::string::npos ? std::string::npos : close - body - 1);
  return trim(inner);
}

Plan parse_plan_response(const std::string& text, bool expect_bisonic) {
  json doc;
  try {
    doc = json::parse(strip_markdown_fences(text));
  } catch (const json::exception& e) {
    throw PlanParse(std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw PlanParse("response is not a JSON object");
  if (!doc.contains("plan")) throw PlanInvalid("plan");
  return validate_chain(doc.at("plan"), expect_bisonic);
}

std::string bisonic_prompt_name(Category c) {
  switch (c) {
    case Category::Alarm: return "Mechanical_Alarm";
    case Category::Phone: return "Phone";
    case Category::Furby: return "Furby";
    case Category::Doorbell: return "Doorbell";
    case Category::Sink: return "Running-Water";
    case Category::Distractor: break;
  }
  throw UnknownCategory("no prompt name for " + std::string(to_string(c)));
}

std::string system_prompt_for(const PlannerObservation& obs) {
  if (!obs.bisonic()) return prompts::single_source_system();
  std::string text = prompts::bi_source_system_template();
  const std::string slot = "{obj_1}";
  const std::string name = bisonic_prompt_name(*obs.known_first_source);
  for (auto pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos + name.size())) {
    text.replace(pos, slot.size(), name);
  }
  return text;
}

}  // namespace soundtrig
